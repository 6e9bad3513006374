#include "nowcast/config.hpp"

#include "nowcast/error.hpp"
#include "nowcast/number_format.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nowcast {

namespace {

std::string trim(const std::string &s) {
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos)
		return {};
	const auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

bool valid_key(const std::string &key) {
	if (key.empty())
		return false;
	for (const char c : key)
		if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.'))
			return false;
	return true;
}

template <class T>
T parse_integer(const std::string &key, const std::string &text) {
	T value{};
	auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
	if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
		throw Error(ErrorCode::parse, "config key '" + key + "': expected an integer, got '" + text + "'");
	return value;
}

double parse_real(const std::string &key, const std::string &text) {
	double value = 0.0;
	auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
	if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
		throw Error(ErrorCode::parse, "config key '" + key + "': expected a number, got '" + text + "'");
	return value;
}

bool parse_bool(const std::string &key, const std::string &text) {
	if (text == "true" || text == "on" || text == "1" || text == "yes")
		return true;
	if (text == "false" || text == "off" || text == "0" || text == "no")
		return false;
	throw Error(ErrorCode::parse, "config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string real_text(double v) { return format_number(v); }

template <class Fn>
void with(const KeyValueDocument &doc, const std::string &key, Fn &&fn) {
	if (const auto v = doc.get(key))
		fn(*v);
}

} // namespace

KeyValueDocument KeyValueDocument::parse(const std::string &text, const std::string &source) {
	KeyValueDocument doc;
	std::istringstream in(text);
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		const std::string body = trim(line);
		if (body.empty() || body.front() == '#')
			continue;
		const auto eq = body.find('=');
		const std::string where = source + ":" + std::to_string(line_no);
		if (eq == std::string::npos)
			throw Error(ErrorCode::parse, where + ": expected 'key = value'");
		const std::string key = trim(body.substr(0, eq));
		const std::string value = trim(body.substr(eq + 1));
		if (!valid_key(key))
			throw Error(ErrorCode::parse, where + ": invalid key '" + key + "'");
		if (doc.contains(key))
			throw Error(ErrorCode::parse, where + ": duplicate key '" + key + "'");
		doc.entries_.emplace(key, value);
	}
	return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path &path) {
	std::ifstream in(path);
	if (!in)
		throw Error(ErrorCode::io, "cannot open config " + path.string());
	std::stringstream buffer;
	buffer << in.rdbuf();
	return parse(buffer.str(), path.filename().string());
}

void KeyValueDocument::set(const std::string &key, const std::string &value) {
	if (!valid_key(key))
		throw Error(ErrorCode::parse, "invalid config key '" + key + "'");
	entries_[key] = trim(value);
}

std::optional<std::string> KeyValueDocument::get(const std::string &key) const {
	const auto it = entries_.find(key);
	if (it == entries_.end())
		return std::nullopt;
	return it->second;
}

std::string KeyValueDocument::canonical() const {
	std::string out;
	for (const auto &[k, v] : entries_)
		out += k + " = " + v + "\n";
	return out;
}

std::string fnv1a_hex(const std::string &text) {
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (const unsigned char c : text) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	char buf[20];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

std::vector<std::string> split_list(const std::string &text) {
	std::vector<std::string> out;
	std::string item;
	std::istringstream in(text);
	while (std::getline(in, item, ','))
		if (auto t = trim(item); !t.empty())
			out.push_back(std::move(t));
	return out;
}

std::vector<Quarter> parse_quarter_list(const std::string &text) {
	std::vector<Quarter> out;
	for (const auto &item : split_list(text))
		out.push_back(parse_quarter(item));
	return out;
}

namespace {

const std::set<std::string> &run_keys() {
	static const std::set<std::string> keys = {
	    "vintage_dir",       "target",        "train_start",      "train_end",       "fill_method",
	    "arma_p",            "arma_q",        "lstm.n_timesteps", "lstm.hidden_size", "lstm.n_layers",
	    "lstm.n_networks",   "lstm.learning_rate", "lstm.n_epochs", "lstm.batch_size", "dfm.max_iter",
	    "dfm.tol",           "window_days",   "output_dir",       "seed",            "targets"};
	return keys;
}

} // namespace

RunConfig RunConfig::from(const KeyValueDocument &doc) {
	for (const auto &[key, value] : doc.entries())
		if (!run_keys().count(key) && key.rfind("dgp.", 0) != 0)
			throw Error(ErrorCode::parse, "unknown config key '" + key + "'");
	RunConfig c;
	with(doc, "vintage_dir", [&](const std::string &v) { c.vintage_dir = v; });
	with(doc, "target", [&](const std::string &v) { c.target_id = v; });
	with(doc, "train_start", [&](const std::string &v) { c.train_first = parse_quarter(v); });
	with(doc, "train_end", [&](const std::string &v) { c.train_last = parse_quarter(v); });
	ArmaOrder order;
	with(doc, "arma_p", [&](const std::string &v) { order.p = parse_integer<int>("arma_p", v); });
	with(doc, "arma_q", [&](const std::string &v) { order.q = parse_integer<int>("arma_q", v); });
	c.lstm.fill_method = parse_fill_method(doc.get("fill_method").value_or("mean"), order);
	if (c.lstm.fill_method.kind == FillMethod::Kind::mean)
		c.lstm.fill_method.order = order;
	with(doc, "lstm.n_timesteps", [&](const std::string &v) { c.lstm.n_timesteps = parse_integer<std::size_t>("lstm.n_timesteps", v); });
	with(doc, "lstm.hidden_size", [&](const std::string &v) { c.lstm.hidden_size = parse_integer<std::size_t>("lstm.hidden_size", v); });
	with(doc, "lstm.n_layers", [&](const std::string &v) { c.lstm.n_layers = parse_integer<std::size_t>("lstm.n_layers", v); });
	with(doc, "lstm.n_networks", [&](const std::string &v) { c.lstm.n_networks = parse_integer<std::size_t>("lstm.n_networks", v); });
	with(doc, "lstm.learning_rate", [&](const std::string &v) { c.lstm.learning_rate = parse_real("lstm.learning_rate", v); });
	with(doc, "lstm.n_epochs", [&](const std::string &v) { c.lstm.n_epochs = parse_integer<std::size_t>("lstm.n_epochs", v); });
	with(doc, "lstm.batch_size", [&](const std::string &v) { c.lstm.batch_size = parse_integer<std::size_t>("lstm.batch_size", v); });
	with(doc, "dfm.max_iter", [&](const std::string &v) { c.dfm_max_iter = parse_integer<int>("dfm.max_iter", v); });
	with(doc, "dfm.tol", [&](const std::string &v) { c.dfm_tol = parse_real("dfm.tol", v); });
	with(doc, "window_days", [&](const std::string &v) { c.window_days = parse_integer<int>("window_days", v); });
	with(doc, "output_dir", [&](const std::string &v) { c.output_dir = v; });
	with(doc, "seed", [&](const std::string &v) { c.seed = parse_integer<std::uint64_t>("seed", v); });
	with(doc, "targets", [&](const std::string &v) { c.targets = parse_quarter_list(v); });
	c.lstm.seed = c.seed;
	c.validate();
	return c;
}

void RunConfig::validate() const {
	if (train_last < train_first)
		throw invalid("training window is empty: train_start must not follow train_end");
	if (window_days <= 0)
		throw invalid("window_days must be positive");
	if (dfm_max_iter <= 0 || !(dfm_tol > 0.0))
		throw invalid("dfm.max_iter and dfm.tol must be positive");
	if (target_id.empty())
		throw invalid("target must not be empty");
	nowcast::validate(lstm);
}

KeyValueDocument RunConfig::to_document() const {
	KeyValueDocument doc;
	doc.set("vintage_dir", vintage_dir.string());
	doc.set("target", target_id);
	doc.set("train_start", format_quarter(train_first));
	doc.set("train_end", format_quarter(train_last));
	doc.set("fill_method", lstm.fill_method.kind == FillMethod::Kind::mean ? "mean" : "arma");
	doc.set("arma_p", std::to_string(lstm.fill_method.order.p));
	doc.set("arma_q", std::to_string(lstm.fill_method.order.q));
	doc.set("lstm.n_timesteps", std::to_string(lstm.n_timesteps));
	doc.set("lstm.hidden_size", std::to_string(lstm.hidden_size));
	doc.set("lstm.n_layers", std::to_string(lstm.n_layers));
	doc.set("lstm.n_networks", std::to_string(lstm.n_networks));
	doc.set("lstm.learning_rate", real_text(lstm.learning_rate));
	doc.set("lstm.n_epochs", std::to_string(lstm.n_epochs));
	doc.set("lstm.batch_size", std::to_string(lstm.batch_size));
	doc.set("dfm.max_iter", std::to_string(dfm_max_iter));
	doc.set("dfm.tol", real_text(dfm_tol));
	doc.set("window_days", std::to_string(window_days));
	doc.set("output_dir", output_dir.string());
	doc.set("seed", std::to_string(seed));
	std::string list;
	for (std::size_t i = 0; i < targets.size(); ++i)
		list += (i ? "," : "") + format_quarter(targets[i]);
	doc.set("targets", list);
	return doc;
}

std::string RunConfig::hash() const {
	const KeyValueDocument full = to_document();
	KeyValueDocument doc;
	for (const auto &[key, value] : full.entries())
		if (key != "output_dir" && key != "targets")
			doc.set(key, value);
	return fnv1a_hex(doc.canonical());
}

DgpConfig dgp_from(const KeyValueDocument &doc) {
	static const std::set<std::string> keys = {
	    "dgp.n_monthly",    "dgp.n_quarterly",  "dgp.t_months",    "dgp.start",       "dgp.factor_ar",
	    "dgp.factor_variance", "dgp.noise_sd",  "dgp.crisis",      "dgp.crisis_start", "dgp.crisis_length",
	    "dgp.crisis_shock", "dgp.vintage_start", "dgp.cadence_switch", "dgp.vintage_end", "dgp.revisions",
	    "dgp.revision_sd"};
	for (const auto &[key, value] : doc.entries())
		if (key.rfind("dgp.", 0) == 0 && !keys.count(key))
			throw Error(ErrorCode::parse, "unknown config key '" + key + "'");
	const auto n_monthly = parse_integer<std::size_t>("dgp.n_monthly", doc.get("dgp.n_monthly").value_or("6"));
	const auto n_quarterly = parse_integer<std::size_t>("dgp.n_quarterly", doc.get("dgp.n_quarterly").value_or("2"));
	const auto t_months = parse_integer<std::size_t>("dgp.t_months", doc.get("dgp.t_months").value_or("120"));
	const auto seed = parse_integer<std::uint64_t>("seed", doc.get("seed").value_or("0"));
	const Period start = parse_period(doc.get("dgp.start").value_or("2005-01"));
	DgpConfig c = standard_dgp(n_monthly, n_quarterly, t_months, seed, start);
	if (const auto target = doc.get("target")) {
		for (auto &s : c.series)
			if (s.id == c.target_id)
				s.id = *target;
		c.target_id = *target;
	}
	with(doc, "dgp.factor_ar", [&](const std::string &v) { c.factor_ar = parse_real("dgp.factor_ar", v); });
	with(doc, "dgp.factor_variance", [&](const std::string &v) { c.factor_variance = parse_real("dgp.factor_variance", v); });
	with(doc, "dgp.noise_sd", [&](const std::string &v) {
		const double sd = parse_real("dgp.noise_sd", v);
		for (auto &s : c.series)
			s.noise_sd = sd;
	});
	with(doc, "dgp.crisis", [&](const std::string &v) {
		if (!parse_bool("dgp.crisis", v))
			c.crisis.reset();
	});
	if (c.crisis) {
		with(doc, "dgp.crisis_start", [&](const std::string &v) { c.crisis->start = parse_period(v); });
		with(doc, "dgp.crisis_length", [&](const std::string &v) { c.crisis->length = parse_integer<int>("dgp.crisis_length", v); });
		with(doc, "dgp.crisis_shock", [&](const std::string &v) { c.crisis->shock = parse_real("dgp.crisis_shock", v); });
	}
	with(doc, "dgp.vintage_start", [&](const std::string &v) { c.vintage_start = parse_date(v); });
	with(doc, "dgp.cadence_switch", [&](const std::string &v) { c.cadence_switch = parse_date(v); });
	with(doc, "dgp.vintage_end", [&](const std::string &v) { c.vintage_end = parse_date(v); });
	with(doc, "dgp.revisions", [&](const std::string &v) { c.revisions = parse_bool("dgp.revisions", v); });
	with(doc, "dgp.revision_sd", [&](const std::string &v) { c.revision_sd = parse_real("dgp.revision_sd", v); });
	c.validate();
	return c;
}

KeyValueDocument to_document(const DgpConfig &c) {
	KeyValueDocument doc;
	doc.set("dgp.n_monthly", std::to_string(c.n_monthly()));
	doc.set("dgp.n_quarterly", std::to_string(c.n_quarterly()));
	doc.set("dgp.t_months", std::to_string(c.t_months));
	doc.set("dgp.start", format_period(c.start));
	doc.set("dgp.factor_ar", real_text(c.factor_ar));
	doc.set("dgp.factor_variance", real_text(c.factor_variance));
	doc.set("dgp.crisis", c.crisis ? "true" : "false");
	if (c.crisis) {
		doc.set("dgp.crisis_start", format_period(c.crisis->start));
		doc.set("dgp.crisis_length", std::to_string(c.crisis->length));
		doc.set("dgp.crisis_shock", real_text(c.crisis->shock));
	}
	doc.set("dgp.vintage_start", format_date(c.vintage_start));
	doc.set("dgp.cadence_switch", format_date(c.cadence_switch));
	doc.set("dgp.vintage_end", format_date(c.vintage_end));
	doc.set("dgp.revisions", c.revisions ? "true" : "false");
	doc.set("dgp.revision_sd", real_text(c.revision_sd));
	doc.set("seed", std::to_string(c.seed));
	doc.set("target", c.target_id);
	return doc;
}

} // namespace nowcast
