#include "cheshire/weakval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

PrePostPair::PrePostPair(Ket pre, Ket post) : pre_(std::move(pre)), post_(std::move(post)) {
    if (!(pre_.convention() == post_.convention())) {
        throw InputError("pre- and post-selected states live on different conventions");
    }
    if (pre_.is_zero() || post_.is_zero()) throw DegenerateInputError("pre/post state is the zero vector");
}

Complex weak_value(const Operator& observable, const PrePostPair& pair) {
    if (!(observable.convention() == pair.convention())) {
        throw InputError("observable and states live on different conventions");
    }
    const Complex overlap = pair.overlap();
    if (std::abs(overlap) <= kOverlapThreshold * pair.pre().norm() * pair.post().norm()) {
        std::ostringstream msg;
        msg << "pre- and post-selected states are orthogonal within tolerance (overlap = " << overlap.real()
            << (overlap.imag() < 0 ? "" : "+") << overlap.imag() << "i)";
        throw AnomalousSelectionError(msg.str(), overlap);
    }
    return inner(pair.post(), apply(observable, pair.pre())) / overlap;
}

std::string to_string(ObservableKind kind) { return kind == ObservableKind::Path ? "path" : "grin"; }

std::string ObservableKey::descriptor() const {
    return to_string(kind) + ":" + std::to_string(photon) + ":" + arm_letter(arm);
}

Operator make_observable(const BasisConvention& convention, const ObservableKey& key) {
    return key.kind == ObservableKind::Path ? path_projector(convention, key.photon, key.arm)
                                            : grin_observable(convention, key.photon, key.arm);
}

std::vector<ObservableKey> report_keys(int photons) {
    std::vector<ObservableKey> keys;
    keys.reserve(static_cast<std::size_t>(4 * photons));
    for (int i = 1; i <= photons; ++i) {
        for (auto kind : {ObservableKind::Path, ObservableKind::Grin}) {
            for (auto arm : {Arm::L, Arm::R}) keys.push_back({i, kind, arm});
        }
    }
    return keys;
}

Complex WeakValueReport::at(const ObservableKey& key) const {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.key == key; });
    if (it == entries.end()) throw InputError("report has no entry " + key.descriptor());
    return it->value;
}

WeakValueReport weak_value_report(const PrePostPair& pair) {
    WeakValueReport report;
    report.overlap = pair.overlap();
    for (const auto& key : report_keys(pair.photons())) {
        report.entries.push_back({key, weak_value(make_observable(pair.convention(), key), pair)});
    }
    return report;
}

}  // namespace cheshire
