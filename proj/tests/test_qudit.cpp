#include <doctest.h>

#include <cmath>
#include <map>

#include "qsdc/qudit.hpp"

using namespace qsdc;

namespace {

const double kSqrtHalf = 1.0 / std::sqrt(2.0);

// brute-force d x d complex matrix product
Unitary matmul(const Unitary& a, const Unitary& b) {
    Unitary out{a.dim, std::vector<cplx>(a.entries.size())};
    for (int r = 0; r < a.dim; ++r)
        for (int c = 0; c < a.dim; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < a.dim; ++k) acc += a.at(r, k) * b.at(k, c);
            out.at(r, c) = acc;
        }
    return out;
}

bool matrices_equal_up_to_phase(const Unitary& a, const Unitary& b) {
    return approx_equal_up_to_phase(a.entries, b.entries);
}

}  // namespace

TEST_CASE("bell state construction") {
    PairState p = make_bell_state(0, 0, 2);
    CHECK(p.amps[0].real() == doctest::Approx(kSqrtHalf).epsilon(1e-12));
    CHECK(std::abs(p.amps[1]) == doctest::Approx(0.0));
    CHECK(std::abs(p.amps[2]) == doctest::Approx(0.0));
    CHECK(p.amps[3].real() == doctest::Approx(kSqrtHalf).epsilon(1e-12));

    PairState p01 = make_bell_state(0, 1, 2);
    CHECK(p01.amps[1].real() == doctest::Approx(kSqrtHalf));
    CHECK(p01.amps[2].real() == doctest::Approx(kSqrtHalf));

    // (|01> - |10>)/sqrt(2): phases e^{2 pi i j / 2} = +1, -1
    PairState p11 = make_bell_state(1, 1, 2);
    CHECK(p11.amps[1].real() == doctest::Approx(kSqrtHalf));
    CHECK(p11.amps[2].real() == doctest::Approx(-kSqrtHalf));

    CHECK(std::abs(norm_sq(make_bell_state(2, 4, 5).amps) - 1.0) < 1e-12);

    CHECK_THROWS_AS(make_bell_state(2, 0, 2), std::domain_error);
    CHECK_THROWS_AS(make_bell_state(0, -1, 3), std::domain_error);
    CHECK_THROWS_AS(make_bell_state(0, 0, 1), std::domain_error);
}

TEST_CASE("pauli unitaries") {
    Unitary id = pauli_unitary(0, 0, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(id.at(r, c) - (r == c ? cplx{1.0} : cplx{0.0})) < 1e-12);

    Unitary shift = pauli_unitary(0, 1, 3);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(shift.at((j + 1) % 3, j) - cplx{1.0}) < 1e-12);

    Unitary z = pauli_unitary(1, 0, 2);
    CHECK(std::abs(z.at(0, 0) - cplx{1.0}) < 1e-12);
    CHECK(std::abs(z.at(1, 1) - cplx{-1.0}) < 1e-12);

    CHECK_THROWS_AS(pauli_unitary(3, 0, 3), std::domain_error);
}

TEST_CASE("applying U_nm to photon B reaches every bell state") {
    for (int d = 2; d <= 5; ++d) {
        PairState psi00 = make_bell_state(0, 0, d);
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m) {
                PairState got = apply_to_photon_b(psi00, pauli_unitary(n, m, d));
                PairState want = make_bell_state(n, m, d);
                CHECK(std::abs(norm_sq(got.amps) - 1.0) < kAlgebraTol);
                for (std::size_t i = 0; i < got.amps.size(); ++i)
                    CHECK(std::abs(got.amps[i] - want.amps[i]) < kAlgebraTol);
            }
    }
    // inverse direction, up to global phase
    PairState back = apply_to_photon_b(make_bell_state(0, 1, 2), pauli_unitary(0, 1, 2));
    CHECK(approx_equal_up_to_phase(back.amps, make_bell_state(0, 0, 2).amps));

    CHECK_THROWS_AS(apply_to_photon_b(make_bell_state(0, 0, 2), pauli_unitary(0, 0, 3)),
                    std::domain_error);
}

TEST_CASE("index composition matches the matrix product") {
    auto [idx0, ph0] = compose_indices({0, 0, 3}, {2, 1, 3});
    CHECK(idx0 == PauliIndex{2, 1, 3});
    CHECK(std::abs(ph0 - cplx{1.0}) < 1e-12);

    auto [idx1, ph1] = compose_indices({1, 0, 2}, {0, 1, 2});
    CHECK(idx1 == PauliIndex{1, 1, 2});
    CHECK(std::abs(ph1 - cplx{1.0}) < 1e-12);

    auto [idx2, ph2] = compose_indices({0, 1, 2}, {1, 0, 2});
    CHECK(idx2 == PauliIndex{1, 1, 2});
    CHECK(std::abs(ph2 - cplx{-1.0}) < 1e-12);

    for (int d : {2, 3, 5})
        for (int n1 = 0; n1 < d; ++n1)
            for (int m1 = 0; m1 < d; ++m1)
                for (int n2 = 0; n2 < d; ++n2)
                    for (int m2 = 0; m2 < d; ++m2) {
                        auto [idx, phase] = compose_indices({n1, m1, d}, {n2, m2, d});
                        Unitary prod =
                            matmul(pauli_unitary(n2, m2, d), pauli_unitary(n1, m1, d));
                        Unitary named = pauli_unitary(idx.n, idx.m, d);
                        for (auto& e : named.entries) e *= phase;
                        for (std::size_t i = 0; i < prod.entries.size(); ++i)
                            CHECK(std::abs(prod.entries[i] - named.entries[i]) < kAlgebraTol);
                        CHECK(matrices_equal_up_to_phase(prod, pauli_unitary(idx.n, idx.m, d)));
                    }

    CHECK_THROWS_AS(compose_indices({0, 0, 2}, {0, 0, 3}), std::domain_error);
}

TEST_CASE("hadamard matrix") {
    Unitary h2 = hadamard_matrix(2);
    CHECK(h2.at(0, 0).real() == doctest::Approx(kSqrtHalf));
    CHECK(h2.at(1, 1).real() == doctest::Approx(-kSqrtHalf));

    QuditState x0 = apply_unitary(computational_ket(0, 3), hadamard_matrix(3));
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(x0.amps[k] - cplx{1.0 / std::sqrt(3.0)}) < 1e-12);

    for (int d = 2; d <= 5; ++d) {
        Unitary h = hadamard_matrix(d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                cplx acc = 0.0;
                for (int k = 0; k < d; ++k) acc += h.at(r, k) * std::conj(h.at(c, k));
                CHECK(std::abs(acc - (r == c ? cplx{1.0} : cplx{0.0})) < 1e-12);
            }
        // H_d |j> reproduces the X-basis vectors
        BasisSet set = builtin_basis_set(d, 2);
        for (int j = 0; j < d; ++j) {
            QuditState got = apply_unitary(computational_ket(j, d), h);
            for (int k = 0; k < d; ++k)
                CHECK(std::abs(got.amps[k] - set.bases[1].vectors[j].amps[k]) < kAlgebraTol);
        }
    }
}

TEST_CASE("built-in basis sets") {
    BasisSet z_x = builtin_basis_set(3, 2);
    CHECK(z_x.count() == 2);
    CHECK(std::abs(z_x.bases[0].vectors[1].amps[1] - cplx{1.0}) < 1e-12);
    // |x_1> = (|0> + e^{2 pi i/3}|1> + e^{-2 pi i/3}|2>)/sqrt(3)
    const double s3 = 1.0 / std::sqrt(3.0);
    cplx w{std::cos(2.0 * M_PI / 3.0), std::sin(2.0 * M_PI / 3.0)};
    CHECK(std::abs(z_x.bases[1].vectors[1].amps[0] - cplx{s3}) < 1e-12);
    CHECK(std::abs(z_x.bases[1].vectors[1].amps[1] - w * s3) < 1e-12);
    CHECK(std::abs(z_x.bases[1].vectors[1].amps[2] - std::conj(w) * s3) < 1e-12);

    for (auto [d, m] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}, {3, 4},
                                                        {4, 2}, {5, 2}}) {
        BasisSet set = builtin_basis_set(d, m);
        CHECK(set.count() == m);
        for (int a = 0; a < m; ++a) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    cplx ov = inner(set.bases[a].vectors[i], set.bases[a].vectors[j]);
                    CHECK(std::abs(ov - (i == j ? cplx{1.0} : cplx{0.0})) < kAlgebraTol);
                }
            for (int b = a + 1; b < m; ++b)
                for (const auto& va : set.bases[a].vectors)
                    for (const auto& vb : set.bases[b].vectors)
                        CHECK(std::abs(std::norm(inner(va, vb)) - 1.0 / d) < kAlgebraTol);
        }
    }

    CHECK_THROWS_AS(builtin_basis_set(5, 3), capability_error);
    CHECK_THROWS_AS(builtin_basis_set(4, 3), capability_error);
    CHECK_THROWS_AS(builtin_basis_set(2, 4), capability_error);
}

TEST_CASE("single-qudit measurement") {
    RandomStream rng(1234);
    BasisSet set = builtin_basis_set(3, 2);

    for (int i = 0; i < 50; ++i)
        CHECK(measure_single(computational_ket(0, 3), set.bases[0], rng).outcome == 0);

    for (int i = 0; i < 50; ++i)
        CHECK(measure_single(set.bases[1].vectors[1], set.bases[1], rng).outcome == 1);

    // |0> in X_3: uniform over 3 outcomes, 3 sigma band at 10,000 draws
    std::map<int, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        ++counts[measure_single(computational_ket(0, 3), set.bases[1], rng).outcome];
    double sigma = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(counts[k] - draws / 3.0) < 3.0 * sigma);

    auto res = measure_single(computational_ket(0, 3), set.bases[1], rng);
    CHECK(std::abs(norm_sq(res.collapsed.amps) - 1.0) < kAlgebraTol);
}

TEST_CASE("local measurement on one photon of a pair") {
    RandomStream rng(99);
    BasisSet b2 = builtin_basis_set(2, 2);
    BasisSet b3 = builtin_basis_set(3, 2);

    int zeros = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto r = measure_pair_local(make_bell_state(0, 0, 2), PhotonTag::A, b2.bases[0], rng);
        if (r.outcome == 0) ++zeros;
        // partner collapses to |outcome>
        CHECK(std::abs(std::norm(r.partner.amps[r.outcome]) - 1.0) < kAlgebraTol);
    }
    CHECK(std::abs(zeros - draws / 2.0) < 3.0 * std::sqrt(draws * 0.25));

    // Psi_00 (d=3) in X_3: outcome x_k collapses the partner onto x_{(3-k) mod 3}
    for (int i = 0; i < 200; ++i) {
        auto r = measure_pair_local(make_bell_state(0, 0, 3), PhotonTag::A, b3.bases[1], rng);
        CHECK(approx_equal_up_to_phase(r.partner.amps,
                                       b3.bases[1].vectors[(3 - r.outcome) % 3].amps));
    }

    // Z measurements on both photons always agree
    for (int d : {2, 3, 4}) {
        BasisSet set = builtin_basis_set(d, 2);
        for (int i = 0; i < 100; ++i) {
            auto r = measure_pair_local(make_bell_state(0, 0, d), PhotonTag::A,
                                        set.bases[0], rng);
            auto partner = measure_single(r.partner, set.bases[0], rng);
            CHECK(partner.outcome == r.outcome);
        }
    }

    CHECK_THROWS_AS(
        measure_pair_local(make_bell_state(0, 0, 2), PhotonTag::B, b3.bases[0], rng),
        std::domain_error);
}

TEST_CASE("bell measurement") {
    RandomStream rng(7);
    for (int d = 2; d <= 5; ++d)
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m)
                CHECK(bell_measure(make_bell_state(n, m, d), rng) == PauliIndex{n, m, d});

    // |00> (d=3) decomposes over (n, 0) uniformly
    PairState prod = tensor(computational_ket(0, 3), computational_ket(0, 3));
    std::map<std::pair<int, int>, int> counts;
    const int draws = 9000;
    for (int i = 0; i < draws; ++i) {
        PauliIndex r = bell_measure(prod, rng);
        ++counts[{r.n, r.m}];
    }
    double sigma = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
    for (int n = 0; n < 3; ++n) {
        CHECK(std::abs(counts[{n, 0}] - draws / 3.0) < 3.0 * sigma);
    }
    for (int n = 0; n < 3; ++n)
        for (int m = 1; m < 3; ++m) CHECK(counts[{n, m}] == 0);

    // |x_0> (x) |x_0> (d=2) splits between (0,0) and (0,1)
    BasisSet b2 = builtin_basis_set(2, 2);
    PairState xx = tensor(b2.bases[1].vectors[0], b2.bases[1].vectors[0]);
    int m0 = 0;
    for (int i = 0; i < draws; ++i) {
        PauliIndex r = bell_measure(xx, rng);
        CHECK(r.n == 0);
        if (r.m == 0) ++m0;
    }
    CHECK(std::abs(m0 - draws / 2.0) < 3.0 * std::sqrt(draws * 0.25));
}

TEST_CASE("correlation maps are derived, deterministic where expected") {
    BasisSet b2 = builtin_basis_set(2, 3);
    BasisSet b3 = builtin_basis_set(3, 4);

    auto z = correlation_map(b3.bases[0]);
    REQUIRE(z.has_value());
    for (int k = 0; k < 3; ++k) CHECK((*z)[k] == k);

    auto x2 = correlation_map(b2.bases[1]);
    REQUIRE(x2.has_value());
    CHECK((*x2)[0] == 0);
    CHECK((*x2)[1] == 1);

    auto x3 = correlation_map(b3.bases[1]);
    REQUIRE(x3.has_value());
    for (int k = 0; k < 3; ++k) CHECK((*x3)[k] == (3 - k) % 3);

    auto y = correlation_map(b2.bases[2]);
    REQUIRE(y.has_value());
    CHECK((*y)[0] == 1);
    CHECK((*y)[1] == 0);

    // the cyclic-phase bases pair with each other, not with themselves
    CHECK_FALSE(correlation_map(b3.bases[2]).has_value());
    CHECK_FALSE(correlation_map(b3.bases[3]).has_value());
    auto pc = partner_correlation(b3, 2);
    CHECK(pc.partner_basis_id == 3);
    auto pc_back = partner_correlation(b3, 3);
    CHECK(pc_back.partner_basis_id == 2);

    CHECK(correlation_capable_bases(b3).size() == 4);
    CHECK(correlation_capable_bases(builtin_basis_set(3, 3)) == std::vector<int>{0, 1});
}
