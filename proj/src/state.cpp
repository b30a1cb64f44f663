#include "rydft/state.hpp"

namespace rydft {

double norm2(const AmplitudeMap& m) {
    double s = 0.0;
    for (const auto& [k, a] : m) s += std::norm(a);
    return s;
}

void prune(AmplitudeMap& m, double eps) {
    for (auto it = m.begin(); it != m.end();) {
        if (std::abs(it->second) < eps) it = m.erase(it);
        else ++it;
    }
}

void scale(AmplitudeMap& m, cplx factor) {
    for (auto& [k, a] : m) a *= factor;
}

cplx inner(const AmplitudeMap& a, const AmplitudeMap& b) {
    const AmplitudeMap& small = a.size() <= b.size() ? a : b;
    const AmplitudeMap& large = a.size() <= b.size() ? b : a;
    cplx s = 0.0;
    for (const auto& [k, av] : small) {
        auto it = large.find(k);
        if (it == large.end()) continue;
        // conj(a) * b regardless of which map is iterated
        if (&small == &a) s += std::conj(av) * it->second;
        else s += std::conj(it->second) * av;
    }
    return s;
}

}  // namespace rydft
