#pragma once

#include <complex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsdc {

using cplx = std::complex<double>;

inline constexpr double kAlgebraTol = 1e-10;

// Unsupported (d, M) combination or similar capability-envelope violation.
class capability_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic seeded random stream. Each logical actor owns one.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    // uniform integer in [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::domain_error("uniform_int: n must be positive");
        return static_cast<int>(std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_));
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }

    // Draw an index from an unnormalized probability vector.
    int sample(const std::vector<double>& probs) {
        double total = 0.0;
        for (double p : probs) total += p;
        double r = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (r < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    // k distinct indices from [0, n), in ascending order.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::mt19937_64 gen_;
};

struct QuditState {
    int dim = 0;
    std::vector<cplx> amps;  // length dim
};

struct PairState {
    int dim = 0;
    std::vector<cplx> amps;  // length dim*dim, row-major: index = j_A*dim + j_B
};

// Names U_nm; doubles as Bell-measurement outcome, message symbol, and key symbol.
struct PauliIndex {
    int n = 0;
    int m = 0;
    int dim = 0;
    bool operator==(const PauliIndex&) const = default;
};

struct Unitary {
    int dim = 0;
    std::vector<cplx> entries;  // row-major dim*dim
    cplx& at(int r, int c) { return entries[static_cast<std::size_t>(r) * dim + c]; }
    const cplx& at(int r, int c) const { return entries[static_cast<std::size_t>(r) * dim + c]; }
};

struct Basis {
    int dim = 0;
    int label = 0;
    std::vector<QuditState> vectors;  // dim orthonormal vectors
};

struct BasisSet {
    int dim = 0;
    std::vector<Basis> bases;
    int count() const { return static_cast<int>(bases.size()); }
};

enum class PhotonTag { A, B };

// --- constructors ---

PairState make_bell_state(int n, int m, int d);
Unitary pauli_unitary(int n, int m, int d);
Unitary hadamard_matrix(int d);
QuditState computational_ket(int j, int d);

// First M bases of the ordered built-in list: [Z_d, X_d] for all d,
// plus the Y-type basis at d=2 and the two cyclic-phase bases at d=3.
BasisSet builtin_basis_set(int d, int M);

// --- algebra ---

PairState apply_to_photon_b(const PairState& pair, const Unitary& u);
QuditState apply_unitary(const QuditState& state, const Unitary& u);
PairState tensor(const QuditState& a, const QuditState& b);

cplx inner(const QuditState& a, const QuditState& b);

// index composition of second * first (as matrices) with its global phase
std::pair<PauliIndex, cplx> compose_indices(const PauliIndex& first, const PauliIndex& second);

// --- measurement ---

struct SingleMeasurement {
    int outcome;
    QuditState collapsed;
};
SingleMeasurement measure_single(const QuditState& state, const Basis& basis, RandomStream& rng);

struct LocalPairMeasurement {
    int outcome;
    QuditState partner;  // conditional post-measurement state of the other photon
};
LocalPairMeasurement measure_pair_local(const PairState& pair, PhotonTag photon,
                                        const Basis& basis, RandomStream& rng);

PauliIndex bell_measure(const PairState& pair, RandomStream& rng);

// Deterministic outcome pairing when both halves of Psi_00 are measured in
// `basis` (brute-forced, never table-driven); nullopt when no such pairing exists.
std::optional<std::vector<int>> correlation_map(const Basis& basis);

// The basis in `set` (with its outcome bijection) whose joint measurement with
// `basis_id` on Psi_00 is deterministic. Equals basis_id itself for every basis
// closed under conjugation (Z, X, the d=2 Y basis).
struct PartnerCorrelation {
    int partner_basis_id;
    std::vector<int> map;  // Alice outcome -> expected partner outcome
};
PartnerCorrelation partner_correlation(const BasisSet& set, int basis_id);

// Basis ids usable for correlation checks, i.e. those with a deterministic
// partner inside the set. All bases qualify except the d=3 cyclic-phase pair
// when only one of the two is present.
std::vector<int> correlation_capable_bases(const BasisSet& set);

// --- helpers used across modules and tests ---

double norm_sq(const std::vector<cplx>& amps);
bool approx_equal_up_to_phase(const std::vector<cplx>& a, const std::vector<cplx>& b,
                              double tol = kAlgebraTol);

}  // namespace qsdc
