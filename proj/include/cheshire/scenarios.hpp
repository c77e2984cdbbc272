#pragma once

// Pre/post-selected pairs realizing the entangled Cheshire-cat pattern, and
// the expected weak-value pattern of each, kept as a plain lookup so it can
// serve as an oracle against the linear-algebra path.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cheshire/weakval.hpp"

namespace cheshire {

class ScenarioId {
public:
    enum class Kind { Single, TwoCat, General, NCat };

    static ScenarioId single();
    static ScenarioId two_cat();
    /// theta must lie strictly inside (0, pi/2).
    static ScenarioId general(double theta, double phi);
    /// n >= 2.
    static ScenarioId n_cat(int n);

    /// "single", "two-cat", "general:theta=..,phi=.." (θ/φ accepted), "n-cat:n=..".
    /// Angles accept plain numbers or multiples of pi such as "pi/4" or "3pi/8".
    static ScenarioId parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    double theta() const noexcept { return theta_; }
    double phi() const noexcept { return phi_; }
    int photons() const noexcept;
    std::string name() const;

private:
    ScenarioId(Kind kind, double theta, double phi, int n) : kind_(kind), theta_(theta), phi_(phi), n_(n) {}

    Kind kind_;
    double theta_;
    double phi_;
    int n_;
};

/// Parses "1.25", "pi", "-pi/2", "3pi/8", "0.5*pi".
double parse_angle(std::string_view text);

PrePostPair build_pair(const ScenarioId& id);

struct PreStateIndices {
    BasisIndex first;   // alternating L R L ... path block, coefficient 1/sqrt(2)
    BasisIndex second;  // alternating R L R ... path block, coefficient 1/sqrt(2)
};

struct PostStateIndices {
    BasisIndex first;                 // coefficient -i / sqrt(n+1)
    BasisIndex main;                  // second path block with V on photon n
    std::vector<BasisIndex> extras;   // second path block with V on photon n-1-l, l = 0..n-2
};

PreStateIndices pre_state_indices(int n);
PostStateIndices post_state_indices(int n);

/// Expected weak value (0 or 1) per observable.
using ExpectedPattern = std::map<ObservableKey, int>;

ExpectedPattern expected_pattern(const ScenarioId& id);

/// Largest entrywise deviation |report - pattern| over all 4n observables.
double pattern_deviation(const WeakValueReport& report, const ExpectedPattern& pattern);

}  // namespace cheshire
