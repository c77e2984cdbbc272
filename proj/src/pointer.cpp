#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cheshire/dense.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/weakval.hpp"

namespace cheshire {

namespace {

void validate(const PointerConfig& cfg) {
    if (!(cfg.coupling > 0.0)) throw InputError("pointer coupling must be positive");
    if (!(cfg.sigma_p > 0.0)) throw InputError("pointer width must be positive");
    if (cfg.grid_points < 64 || cfg.grid_points % 2 != 0) {
        throw InputError("pointer grid needs an even number of points >= 64");
    }
    if (!(cfg.extent_sigmas > 0.0)) throw InputError("pointer grid extent must be positive");
}

struct Moments {
    double mean;
    double weight;
};

Moments moments(const std::vector<double>& axis, const std::vector<Complex>& psi) {
    double weight = 0.0;
    double first = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        const double p = std::norm(psi[k]);
        weight += p;
        first += axis[k] * p;
    }
    return {first / weight, weight};
}

}  // namespace

PointerShift pointer_shift(const Operator& observable, const PrePostPair& pair, const PointerConfig& cfg) {
    validate(cfg);
    if (!(observable.convention() == pair.convention())) {
        throw InputError("observable and states live on different conventions");
    }
    if (!observable.is_hermitian()) throw InputError("pointer coupling needs a Hermitian observable");

    // Spectral weights w_j = <post|P_j|pre> over an eigenbasis of the observable.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eigen(to_dense(observable));
    const Eigen::VectorXd& eigenvalues = eigen.eigenvalues();
    const Eigen::VectorXcd pre = eigen.eigenvectors().adjoint() * to_dense(normalize(pair.pre()));
    const Eigen::VectorXcd post = eigen.eigenvectors().adjoint() * to_dense(normalize(pair.post()));
    const Eigen::VectorXcd weights = post.conjugate().cwiseProduct(pre);
    const double largest = eigenvalues.cwiseAbs().maxCoeff();

    const std::size_t n = cfg.grid_points;
    const double sigma_x = 1.0 / (2.0 * cfg.sigma_p);
    const double half_width = cfg.extent_sigmas * sigma_x + cfg.coupling * largest;
    const double dx = 2.0 * half_width / static_cast<double>(n);
    const double dp = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);

    std::vector<double> x(n);
    std::vector<double> p(n);
    std::vector<Complex> phi(n);
    const double amplitude = std::pow(2.0 * std::numbers::pi * sigma_x * sigma_x, -0.25);
    for (std::size_t k = 0; k < n; ++k) {
        const auto offset = static_cast<double>(k) - static_cast<double>(n / 2);
        x[k] = offset * dx;
        phi[k] = amplitude * std::exp(-x[k] * x[k] / (4.0 * sigma_x * sigma_x));
        const auto signed_k = k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
        p[k] = signed_k * dp;
    }
    const Moments initial_x = moments(x, phi);
    if (initial_x.weight * dx < 1.0 - 1e-10) {
        throw InputError("pointer grid truncates the Gaussian (norm " + std::to_string(initial_x.weight * dx) + ")");
    }

    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, phi);
    const Moments initial_p = moments(p, spectrum);

    std::vector<Complex> coupled(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex response{};
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            if (weights(j) == Complex{}) continue;
            response += weights(j) * std::exp(Complex{0.0, -cfg.coupling * p[k] * eigenvalues(j)});
        }
        coupled[k] = spectrum[k] * response;
    }
    const Moments final_p = moments(p, coupled);

    std::vector<Complex> conditional;
    fft.inv(conditional, coupled);
    const Moments final_x = moments(x, conditional);

    const double probability = final_x.weight * dx;
    if (!(probability >= 1e-15)) {
        throw AnomalousSelectionError("post-selection probability " + std::to_string(probability) +
                                          " below 1e-15 at coupling " + std::to_string(cfg.coupling),
                                      pair.overlap());
    }
    return {final_x.mean - initial_x.mean, final_p.mean - initial_p.mean, probability};
}

std::vector<PointerSweepRow> pointer_sweep(const Operator& observable, const PrePostPair& pair,
                                           const std::vector<double>& couplings, PointerConfig config) {
    const Complex target = weak_value(observable, pair);
    std::vector<PointerSweepRow> rows;
    for (double g : couplings) {
        config.coupling = g;
        const PointerShift shift = pointer_shift(observable, pair, config);
        const double re = shift.position / g;
        const double im = shift.momentum / (2.0 * g * config.sigma_p * config.sigma_p);
        rows.push_back({g, re, im, std::abs(re - target.real())});
    }
    return rows;
}

bool converges_quadratically(const std::vector<PointerSweepRow>& rows, double efficiency, double noise_floor) {
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const auto& a = rows[k];
        const auto& b = rows[k + 1];
        if (b.deviation <= noise_floor) continue;
        const double ratio = a.coupling / b.coupling;
        if (a.deviation < efficiency * ratio * ratio * b.deviation) return false;
    }
    return true;
}

}  // namespace cheshire
