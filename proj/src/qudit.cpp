#include "qsdc/qudit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qsdc {

namespace {

cplx root_of_unity(int numerator, int d) {
    double angle = 2.0 * std::numbers::pi * numerator / d;
    return {std::cos(angle), std::sin(angle)};
}

void check_index(int n, int m, int d) {
    if (d < 2) throw std::domain_error("dimension must be >= 2");
    if (n < 0 || n >= d || m < 0 || m >= d)
        throw std::domain_error("Pauli index (n, m) out of range for dimension " +
                                std::to_string(d));
}

Basis basis_from_columns(const Unitary& u, int label) {
    Basis b;
    b.dim = u.dim;
    b.label = label;
    for (int col = 0; col < u.dim; ++col) {
        QuditState v{u.dim, std::vector<cplx>(u.dim)};
        for (int row = 0; row < u.dim; ++row) v.amps[row] = u.at(row, col);
        b.vectors.push_back(std::move(v));
    }
    return b;
}

// (e^{i*phi}|0> + |1> + |2>)/sqrt(3) cycled so the phase sits on |0>, |1>, |2> in turn.
Basis cyclic_phase_basis_d3(cplx phase, int label) {
    Basis b;
    b.dim = 3;
    b.label = label;
    const double inv = 1.0 / std::sqrt(3.0);
    for (int pos = 0; pos < 3; ++pos) {
        QuditState v{3, std::vector<cplx>(3, cplx{inv, 0.0})};
        v.amps[pos] *= phase;
        b.vectors.push_back(std::move(v));
    }
    return b;
}

}  // namespace

std::vector<int> RandomStream::sample_without_replacement(int n, int k) {
    if (k < 0 || k > n) throw std::domain_error("sample_without_replacement: bad k");
    // Floyd's algorithm
    std::vector<bool> taken(n, false);
    for (int j = n - k; j < n; ++j) {
        int t = uniform_int(j + 1);
        if (taken[t]) t = j;
        taken[t] = true;
    }
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < n; ++i)
        if (taken[i]) out.push_back(i);
    return out;
}

PairState make_bell_state(int n, int m, int d) {
    check_index(n, m, d);
    PairState p{d, std::vector<cplx>(static_cast<std::size_t>(d) * d)};
    const double inv = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j)
        p.amps[static_cast<std::size_t>(j) * d + (j + m) % d] = root_of_unity(j * n, d) * inv;
    return p;
}

Unitary pauli_unitary(int n, int m, int d) {
    check_index(n, m, d);
    Unitary u{d, std::vector<cplx>(static_cast<std::size_t>(d) * d)};
    for (int j = 0; j < d; ++j) u.at((j + m) % d, j) = root_of_unity(j * n, d);
    return u;
}

Unitary hadamard_matrix(int d) {
    if (d < 2) throw std::domain_error("dimension must be >= 2");
    Unitary u{d, std::vector<cplx>(static_cast<std::size_t>(d) * d)};
    const double inv = 1.0 / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) u.at(k, j) = root_of_unity(j * k, d) * inv;
    return u;
}

QuditState computational_ket(int j, int d) {
    if (d < 2 || j < 0 || j >= d) throw std::domain_error("computational_ket: bad index");
    QuditState s{d, std::vector<cplx>(d)};
    s.amps[j] = 1.0;
    return s;
}

BasisSet builtin_basis_set(int d, int M) {
    if (d < 2 || M < 1) throw std::domain_error("builtin_basis_set: d >= 2 and M >= 1 required");
    int max_m = 2;
    if (d == 2) max_m = 3;
    if (d == 3) max_m = 4;
    if (M > max_m)
        throw capability_error("builtin_basis_set: supported envelope is M <= 2 for general d, "
                               "M <= 3 for d = 2, M <= 4 for d = 3 (requested d = " +
                               std::to_string(d) + ", M = " + std::to_string(M) + ")");

    BasisSet set;
    set.dim = d;

    Basis z;
    z.dim = d;
    z.label = 0;
    for (int j = 0; j < d; ++j) z.vectors.push_back(computational_ket(j, d));
    set.bases.push_back(std::move(z));

    if (M >= 2) set.bases.push_back(basis_from_columns(hadamard_matrix(d), 1));

    if (M >= 3 && d == 2) {
        Basis y;
        y.dim = 2;
        y.label = 2;
        const double inv = 1.0 / std::sqrt(2.0);
        y.vectors.push_back({2, {cplx{inv, 0.0}, cplx{0.0, inv}}});
        y.vectors.push_back({2, {cplx{inv, 0.0}, cplx{0.0, -inv}}});
        set.bases.push_back(std::move(y));
    }
    if (d == 3) {
        if (M >= 3) set.bases.push_back(cyclic_phase_basis_d3(root_of_unity(1, 3), 2));
        if (M >= 4) set.bases.push_back(cyclic_phase_basis_d3(root_of_unity(-1, 3), 3));
    }
    return set;
}

PairState apply_to_photon_b(const PairState& pair, const Unitary& u) {
    if (pair.dim != u.dim) throw std::domain_error("apply_to_photon_b: dimension mismatch");
    const int d = pair.dim;
    PairState out{d, std::vector<cplx>(static_cast<std::size_t>(d) * d)};
    for (int a = 0; a < d; ++a)
        for (int r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < d; ++c)
                acc += u.at(r, c) * pair.amps[static_cast<std::size_t>(a) * d + c];
            out.amps[static_cast<std::size_t>(a) * d + r] = acc;
        }
    return out;
}

QuditState apply_unitary(const QuditState& state, const Unitary& u) {
    if (state.dim != u.dim) throw std::domain_error("apply_unitary: dimension mismatch");
    const int d = state.dim;
    QuditState out{d, std::vector<cplx>(d)};
    for (int r = 0; r < d; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < d; ++c) acc += u.at(r, c) * state.amps[c];
        out.amps[r] = acc;
    }
    return out;
}

PairState tensor(const QuditState& a, const QuditState& b) {
    if (a.dim != b.dim) throw std::domain_error("tensor: dimension mismatch");
    const int d = a.dim;
    PairState out{d, std::vector<cplx>(static_cast<std::size_t>(d) * d)};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.amps[static_cast<std::size_t>(i) * d + j] = a.amps[i] * b.amps[j];
    return out;
}

cplx inner(const QuditState& a, const QuditState& b) {
    if (a.dim != b.dim) throw std::domain_error("inner: dimension mismatch");
    cplx acc = 0.0;
    for (int j = 0; j < a.dim; ++j) acc += std::conj(a.amps[j]) * b.amps[j];
    return acc;
}

std::pair<PauliIndex, cplx> compose_indices(const PauliIndex& first, const PauliIndex& second) {
    if (first.dim != second.dim) throw std::domain_error("compose_indices: dimension mismatch");
    const int d = first.dim;
    PauliIndex out{(first.n + second.n) % d, (first.m + second.m) % d, d};
    // U_{n2,m2} U_{n1,m1} |j> picks up e^{2*pi*i*m1*n2/d} beyond U_{n1+n2,m1+m2}
    cplx phase = root_of_unity(first.m * second.n, d);
    return {out, phase};
}

SingleMeasurement measure_single(const QuditState& state, const Basis& basis, RandomStream& rng) {
    if (state.dim != basis.dim) throw std::domain_error("measure_single: dimension mismatch");
    std::vector<double> probs(basis.dim);
    for (int k = 0; k < basis.dim; ++k) probs[k] = std::norm(inner(basis.vectors[k], state));
    int outcome = rng.sample(probs);
    return {outcome, basis.vectors[outcome]};
}

LocalPairMeasurement measure_pair_local(const PairState& pair, PhotonTag photon,
                                        const Basis& basis, RandomStream& rng) {
    if (pair.dim != basis.dim) throw std::domain_error("measure_pair_local: dimension mismatch");
    const int d = pair.dim;
    // conditional partner amplitudes for each outcome
    std::vector<std::vector<cplx>> partner(d, std::vector<cplx>(d));
    std::vector<double> probs(d);
    for (int k = 0; k < d; ++k) {
        const auto& bk = basis.vectors[k].amps;
        for (int r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (int j = 0; j < d; ++j) {
                std::size_t idx = (photon == PhotonTag::A)
                                      ? static_cast<std::size_t>(j) * d + r
                                      : static_cast<std::size_t>(r) * d + j;
                acc += std::conj(bk[j]) * pair.amps[idx];
            }
            partner[k][r] = acc;
        }
        probs[k] = norm_sq(partner[k]);
    }
    int outcome = rng.sample(probs);
    double scale = 1.0 / std::sqrt(probs[outcome]);
    QuditState rest{d, partner[outcome]};
    for (auto& a : rest.amps) a *= scale;
    return {outcome, std::move(rest)};
}

PauliIndex bell_measure(const PairState& pair, RandomStream& rng) {
    const int d = pair.dim;
    std::vector<double> probs(static_cast<std::size_t>(d) * d);
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) {
            PairState bell = make_bell_state(n, m, d);
            cplx acc = 0.0;
            for (std::size_t i = 0; i < bell.amps.size(); ++i)
                acc += std::conj(bell.amps[i]) * pair.amps[i];
            probs[static_cast<std::size_t>(n) * d + m] = std::norm(acc);
        }
    int idx = rng.sample(probs);
    return {idx / d, idx % d, d};
}

std::optional<std::vector<int>> correlation_map(const Basis& basis) {
    const int d = basis.dim;
    PairState psi = make_bell_state(0, 0, d);
    std::vector<int> map(d, -1);
    for (int k = 0; k < d; ++k) {
        // project photon A onto basis vector k, normalize the B remainder
        const auto& bk = basis.vectors[k].amps;
        std::vector<cplx> rest(d);
        for (int r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (int j = 0; j < d; ++j)
                acc += std::conj(bk[j]) * psi.amps[static_cast<std::size_t>(j) * d + r];
            rest[r] = acc;
        }
        double total = norm_sq(rest);
        QuditState cond{d, rest};
        for (int l = 0; l < d; ++l) {
            double overlap = std::norm(inner(basis.vectors[l], cond)) / total;
            if (std::abs(overlap - 1.0) < 1e-9) {
                map[k] = l;
                break;
            }
        }
        if (map[k] < 0) return std::nullopt;
    }
    return map;
}

namespace {

std::optional<PartnerCorrelation> try_partner_correlation(const BasisSet& set, int basis_id) {
    const int d = set.dim;
    const Basis& a = set.bases[basis_id];
    PairState psi = make_bell_state(0, 0, d);
    for (int cand = 0; cand < set.count(); ++cand) {
        const Basis& b = set.bases[cand];
        std::vector<int> map(d, -1);
        bool ok = true;
        for (int k = 0; k < d && ok; ++k) {
            std::vector<cplx> rest(d);
            for (int r = 0; r < d; ++r) {
                cplx acc = 0.0;
                for (int j = 0; j < d; ++j)
                    acc += std::conj(a.vectors[k].amps[j]) *
                           psi.amps[static_cast<std::size_t>(j) * d + r];
                rest[r] = acc;
            }
            double total = norm_sq(rest);
            QuditState cond{d, rest};
            ok = false;
            for (int l = 0; l < d; ++l) {
                double overlap = std::norm(inner(b.vectors[l], cond)) / total;
                if (std::abs(overlap - 1.0) < 1e-9) {
                    map[k] = l;
                    ok = true;
                    break;
                }
            }
        }
        if (ok) return PartnerCorrelation{cand, map};
    }
    return std::nullopt;
}

}  // namespace

PartnerCorrelation partner_correlation(const BasisSet& set, int basis_id) {
    if (basis_id < 0 || basis_id >= set.count())
        throw std::domain_error("partner_correlation: basis id out of range");
    auto pc = try_partner_correlation(set, basis_id);
    if (!pc)
        throw std::domain_error("partner_correlation: no deterministic partner basis in the set");
    return *pc;
}

std::vector<int> correlation_capable_bases(const BasisSet& set) {
    std::vector<int> out;
    for (int b = 0; b < set.count(); ++b)
        if (try_partner_correlation(set, b)) out.push_back(b);
    return out;
}

double norm_sq(const std::vector<cplx>& amps) {
    double acc = 0.0;
    for (const auto& a : amps) acc += std::norm(a);
    return acc;
}

bool approx_equal_up_to_phase(const std::vector<cplx>& a, const std::vector<cplx>& b, double tol) {
    if (a.size() != b.size()) return false;
    // align on the largest-magnitude entry of a
    std::size_t pivot = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::norm(a[i]) > best) {
            best = std::norm(a[i]);
            pivot = i;
        }
    if (best < tol) return norm_sq(b) < tol;
    if (std::abs(b[pivot]) < 1e-15) return false;
    cplx phase = a[pivot] / b[pivot];
    phase /= std::abs(phase);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - phase * b[i]) > tol) return false;
    return true;
}

}  // namespace qsdc
