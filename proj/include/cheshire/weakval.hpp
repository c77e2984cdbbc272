#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cheshire/hilbert.hpp"

namespace cheshire {

/// Overlaps below this (relative to the product of norms) make weak values undefined.
inline constexpr double kOverlapThreshold = 1e-10;

class PrePostPair {
public:
    PrePostPair(Ket pre, Ket post);

    const Ket& pre() const noexcept { return pre_; }
    const Ket& post() const noexcept { return post_; }
    int photons() const noexcept { return pre_.convention().photons(); }
    const BasisConvention& convention() const noexcept { return pre_.convention(); }

    /// <post|pre>
    Complex overlap() const { return inner(post_, pre_); }

private:
    Ket pre_;
    Ket post_;
};

/// <post|O|pre> / <post|pre>. Throws AnomalousSelectionError when the pair is
/// numerically orthogonal.
Complex weak_value(const Operator& observable, const PrePostPair& pair);

enum class ObservableKind { Path, Grin };

std::string to_string(ObservableKind kind);

struct ObservableKey {
    int photon;
    ObservableKind kind;
    Arm arm;

    std::string descriptor() const;
    friend auto operator<=>(const ObservableKey&, const ObservableKey&) = default;
};

Operator make_observable(const BasisConvention& convention, const ObservableKey& key);

/// The 4n keys in report order: photon, then path before grin, then L before R.
std::vector<ObservableKey> report_keys(int photons);

struct WeakValueReport {
    struct Entry {
        ObservableKey key;
        Complex value;
    };

    std::vector<Entry> entries;
    Complex overlap;

    Complex at(const ObservableKey& key) const;
};

WeakValueReport weak_value_report(const PrePostPair& pair);

// ---------------------------------------------------------------------------
// von Neumann pointer

/// Gaussian pointer coupled through exp(-i g O p). `sigma_p` is the momentum
/// spread of the pointer; the position spread is 1 / (2 sigma_p).
struct PointerConfig {
    double coupling = 1e-3;
    double sigma_p = 0.5;
    std::size_t grid_points = 2048;
    /// Half-width of the position grid in units of the position spread.
    double extent_sigmas = 12.0;
};

struct PointerShift {
    double position;
    double momentum;
    /// Probability of the post-selection succeeding at this coupling.
    double postselection_probability;
};

/// Conditional pointer displacement after the coupling and post-selection.
/// As g -> 0: position / g -> Re<O>_w and momentum / (2 g sigma_p^2) -> Im<O>_w.
PointerShift pointer_shift(const Operator& observable, const PrePostPair& pair, const PointerConfig& config);

struct PointerSweepRow {
    double coupling;
    double re_estimate;  // position shift / g
    double im_estimate;  // momentum shift / (2 g sigma_p^2)
    double deviation;    // |re_estimate - Re<O>_w|
};

/// One pointer run per coupling in `couplings`; other settings from `config`.
std::vector<PointerSweepRow> pointer_sweep(const Operator& observable, const PrePostPair& pair,
                                           const std::vector<double>& couplings, PointerConfig config = {});

/// True when every step g_k -> g_{k+1} shrinks the deviation by at least
/// `efficiency * (g_k / g_{k+1})^2`, or the deviation is already below `noise_floor`.
bool converges_quadratically(const std::vector<PointerSweepRow>& rows, double efficiency, double noise_floor);

}  // namespace cheshire
