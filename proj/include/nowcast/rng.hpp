#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace nowcast {

/// Seeded generator whose draws are identical on every platform. The engine
/// is fully specified by the standard; the distributions below are not, so
/// they are written out here.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	/// Uniform on [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Standard normal by Box-Muller; the second variate is cached.
	double normal() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		double u1 = uniform();
		while (u1 <= 0.0)
			u1 = uniform();
		const double u2 = uniform();
		const double radius = std::sqrt(-2.0 * std::log(u1));
		const double angle = 2.0 * std::numbers::pi * u2;
		spare_ = radius * std::sin(angle);
		has_spare_ = true;
		return radius * std::cos(angle);
	}

	/// Index in [0, n) for small n.
	std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
	std::mt19937_64 engine_;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

} // namespace nowcast
