#pragma once

#include "nowcast/lstm.hpp"
#include "nowcast/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nowcast {

/// Plain-text `key = value` document. Blank lines and lines starting with `#`
/// are ignored; a key may appear once. Keys are validated by their consumers.
class KeyValueDocument {
public:
	static KeyValueDocument parse(const std::string &text, const std::string &source = "<config>");
	static KeyValueDocument load(const std::filesystem::path &path);

	void set(const std::string &key, const std::string &value);
	std::optional<std::string> get(const std::string &key) const;
	bool contains(const std::string &key) const { return entries_.count(key) != 0; }
	const std::map<std::string, std::string> &entries() const { return entries_; }

	/// Sorted `key = value` lines.
	std::string canonical() const;

private:
	std::map<std::string, std::string> entries_;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string &text);

struct RunConfig {
	std::filesystem::path vintage_dir;
	std::string target_id = "target";
	Quarter train_first{2005, 2};
	Quarter train_last{2019, 4};
	LstmConfig lstm;
	int dfm_max_iter = 500;
	double dfm_tol = 1e-6;
	int window_days = 100;
	std::filesystem::path output_dir = "out";
	std::uint64_t seed = 0;
	/// Default target quarters for `backtest`.
	std::vector<Quarter> targets;

	/// Unknown keys are errors, except `dgp.*` keys which belong to `simulate`.
	static RunConfig from(const KeyValueDocument &doc);
	/// Every effective setting, defaults included.
	KeyValueDocument to_document() const;
	/// Hash of the canonical effective configuration, excluding `output_dir`
	/// and `targets`.
	std::string hash() const;

	void validate() const;
};

/// Simulation settings from `dgp.*` keys (plus the shared `seed` and `target`),
/// starting from standard_dgp.
DgpConfig dgp_from(const KeyValueDocument &doc);
KeyValueDocument to_document(const DgpConfig &config);

std::vector<Quarter> parse_quarter_list(const std::string &text);
std::vector<std::string> split_list(const std::string &text);

} // namespace nowcast
