#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "treid/error.hpp"
#include "treid/rng.hpp"
#include "treid/spectral.hpp"
#include "treid/txqda.hpp"

#include "test_support.hpp"

using namespace treid;
using test::random_matrix;
using test::random_spd;
using test::rel_error;

namespace {

// Explicit pair-enumeration oracle for scatter_pair: loops over every
// cross-view pair of pairable persons and accumulates the difference
// outer products directly. Kept deliberately independent of the
// class-sum implementation.
std::pair<Matrix, Matrix> scatter_bruteforce(const CrossViewSet& set, const Matrix& u_other,
                                             int mode) {
    const CrossViewReport report = validate_cross_view(set);
    auto projected = [&](std::size_t i) {
        const Matrix s = set.tensor.slice(i);
        return mode == 1 ? s * u_other : transpose_times(u_other, s);
    };
    auto outer_self = [&](const Matrix& d) {
        return mode == 1 ? times_transpose(d, d) : transpose_times(d, d);
    };

    // pairable = persons present in both views
    auto pairable = [&](const std::string& person) {
        bool a = false, b = false;
        for (std::size_t i = 0; i < set.samples(); ++i) {
            if (set.person_ids[i] != person) continue;
            (set.camera_ids[i] == report.view_a ? a : b) = true;
        }
        return a && b;
    };

    const std::size_t dim = mode == 1 ? set.tensor.dim(1) : set.tensor.dim(2);
    Matrix v_i(dim, dim), v_e(dim, dim);
    std::size_t n_i = 0, n_e = 0;
    for (std::size_t i = 0; i < set.samples(); ++i) {
        if (set.camera_ids[i] != report.view_a || !pairable(set.person_ids[i])) continue;
        for (std::size_t j = 0; j < set.samples(); ++j) {
            if (set.camera_ids[j] != report.view_b || !pairable(set.person_ids[j])) continue;
            const Matrix d = projected(i) - projected(j);
            const Matrix o = outer_self(d);
            if (set.person_ids[i] == set.person_ids[j]) {
                v_i = v_i + o;
                ++n_i;
            } else {
                v_e = v_e + o;
                ++n_e;
            }
        }
    }
    return {(1.0 / static_cast<double>(n_e)) * v_e, (1.0 / static_cast<double>(n_i)) * v_i};
}

// Random cross-view set with class-dependent mode-1 means (an independent
// mean vector per column, so mode 2 carries no class structure) plus
// i.i.d. noise.
CrossViewSet make_set(std::size_t classes, std::size_t per_view, std::size_t s, std::size_t n,
                      double signal, double noise, std::uint64_t seed) {
    GaussianStream g(Xoshiro256pp::for_stream(seed, 0));
    std::vector<Matrix> means;
    for (std::size_t c = 0; c < classes; ++c) {
        Matrix mu(s, n);
        for (double& v : mu.data()) v = signal * g.next();
        means.push_back(std::move(mu));
    }

    CrossViewSet set;
    set.tensor = Tensor3({s, n, classes * per_view * 2});
    std::size_t slice = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t view = 0; view < 2; ++view) {
            for (std::size_t k = 0; k < per_view; ++k) {
                Matrix m = means[c];
                for (double& v : m.data()) v += noise * g.next();
                set.tensor.set_slice(slice++, m);
                set.person_ids.push_back("p" + std::to_string(c));
                set.camera_ids.push_back(view == 0 ? "cam1" : "cam2");
            }
        }
    }
    set.view_a_camera = "cam1";
    return set;
}

Matrix projector(const Matrix& u) { return times_transpose(u, u); }

}  // namespace

TEST_CASE("validate_cross_view reports unpaired persons and rejects degenerate sets") {
    CrossViewSet set = make_set(3, 1, 4, 2, 1.0, 0.1, 1);
    CrossViewReport report = validate_cross_view(set);
    CHECK(report.view_a == "cam1");
    CHECK(report.view_b == "cam2");
    CHECK(report.paired_persons == 3);
    CHECK(report.unpaired_persons.empty());

    // strip person p2's cam2 samples -> unpaired
    CrossViewSet broken = set;
    for (std::size_t i = 0; i < broken.samples(); ++i) {
        if (broken.person_ids[i] == "p2" && broken.camera_ids[i] == "cam2") {
            broken.camera_ids[i] = "cam1";
        }
    }
    report = validate_cross_view(broken);
    CHECK(report.unpaired_persons == std::vector<std::string>{"p2"});

    CrossViewSet one_cam = set;
    for (auto& c : one_cam.camera_ids) c = "cam1";
    one_cam.view_a_camera.reset();
    CHECK_THROWS_AS((void)validate_cross_view(one_cam), DataError);

    CrossViewSet one_person = set;
    for (auto& p : one_person.person_ids) p = "p0";
    CHECK_THROWS_AS((void)validate_cross_view(one_person), DataError);
}

TEST_CASE("scatter_pair: identical slices within person give V_I = 0") {
    CrossViewSet set;
    set.tensor = Tensor3({3, 2, 4});
    Xoshiro256pp rng(5);
    const Matrix s0 = random_matrix(3, 2, rng);
    const Matrix s1 = random_matrix(3, 2, rng);
    set.tensor.set_slice(0, s0);
    set.tensor.set_slice(1, s0);
    set.tensor.set_slice(2, s1);
    set.tensor.set_slice(3, s1);
    set.person_ids = {"a", "a", "b", "b"};
    set.camera_ids = {"cam1", "cam2", "cam1", "cam2"};
    const ScatterPair sp = scatter_pair(set, Matrix::identity(2), 1);
    CHECK(sp.intrinsic.frobenius() == 0.0);
    CHECK(sp.extrinsic.frobenius() > 0.0);
    CHECK(sp.intrinsic_pairs == 2);
    CHECK(sp.extrinsic_pairs == 2);
}

TEST_CASE("scatter_pair equals brute-force pair enumeration (3 persons, identity)") {
    const CrossViewSet set = make_set(3, 1, 4, 2, 1.0, 0.3, 7);
    const ScatterPair sp = scatter_pair(set, Matrix::identity(2), 1);
    const auto [ve, vi] = scatter_bruteforce(set, Matrix::identity(2), 1);
    CHECK(rel_error(sp.extrinsic, ve) < 1e-10);
    CHECK(rel_error(sp.intrinsic, vi) < 1e-10);
}

TEST_CASE("scatter_pair matches the oracle on random sets up to m = 40") {
    Xoshiro256pp rng(11);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t classes = 2 + rng.bounded(7);  // up to 8 identities
        const std::size_t per_view = 1 + rng.bounded(2);  // m <= 8*2*2 = 32
        const std::size_t s = 2 + rng.bounded(4);
        const std::size_t n = 1 + rng.bounded(3);
        const CrossViewSet set =
            make_set(classes, per_view, s, n, 1.0, 0.5, 1000 + static_cast<std::uint64_t>(rep));
        for (int mode = 1; mode <= 2; ++mode) {
            const std::size_t other = mode == 1 ? n : s;
            const Matrix u_other = random_matrix(other, 1 + rng.bounded(other), rng);
            const ScatterPair sp = scatter_pair(set, u_other, mode);
            const auto [ve, vi] = scatter_bruteforce(set, u_other, mode);
            CHECK(rel_error(sp.extrinsic, ve) < 1e-9);
            CHECK(rel_error(sp.intrinsic, vi) < 1e-9);
        }
    }
}

TEST_CASE("scatter_pair excludes unpaired persons, matching the oracle") {
    CrossViewSet set = make_set(4, 1, 3, 2, 1.0, 0.4, 23);
    // person p3 loses its cam2 sample: give it to cam1
    for (std::size_t i = 0; i < set.samples(); ++i)
        if (set.person_ids[i] == "p3" && set.camera_ids[i] == "cam2")
            set.camera_ids[i] = "cam1";
    const ScatterPair sp = scatter_pair(set, Matrix::identity(2), 1);
    const auto [ve, vi] = scatter_bruteforce(set, Matrix::identity(2), 1);
    CHECK(rel_error(sp.extrinsic, ve) < 1e-10);
    CHECK(rel_error(sp.intrinsic, vi) < 1e-10);
    CHECK(sp.intrinsic_pairs == 3);
}

TEST_CASE("scatter symmetry, PSD, and quadratic scaling") {
    const CrossViewSet set = make_set(4, 2, 5, 3, 1.0, 0.5, 31);
    const ScatterPair sp = scatter_pair(set, Matrix::identity(3), 1);
    for (const Matrix* m : {&sp.extrinsic, &sp.intrinsic}) {
        CHECK(rel_error(*m, m->transposed()) < 1e-12);
        const EigenPairs p = sym_eig(*m);
        double tr = 0.0;
        for (std::size_t i = 0; i < m->rows(); ++i) tr += (*m)(i, i);
        CHECK(p.values.back() >= -1e-10 * tr);
    }

    CrossViewSet scaled = set;
    for (double& v : scaled.tensor.data()) v *= 3.0;
    const ScatterPair sp9 = scatter_pair(scaled, Matrix::identity(3), 1);
    CHECK(rel_error(sp9.intrinsic, 9.0 * sp.intrinsic) < 1e-12);
    CHECK(rel_error(sp9.extrinsic, 9.0 * sp.extrinsic) < 1e-12);
}

TEST_CASE("scatter_pair data errors when pairs are missing") {
    // two persons, both only in one view each -> no pairs at all
    CrossViewSet set;
    set.tensor = Tensor3({2, 2, 2});
    set.person_ids = {"a", "b"};
    set.camera_ids = {"cam1", "cam2"};
    set.view_a_camera = "cam1";
    CHECK_THROWS_AS((void)scatter_pair(set, Matrix::identity(2), 1), DataError);

    // single pairable person: intrinsic pairs exist, extrinsic don't
    CrossViewSet solo;
    solo.tensor = Tensor3({2, 2, 3});
    solo.person_ids = {"a", "a", "b"};
    solo.camera_ids = {"cam1", "cam2", "cam1"};
    solo.view_a_camera = "cam1";
    CHECK_THROWS_AS((void)scatter_pair(solo, Matrix::identity(2), 1), DataError);
}

TEST_CASE("solve_mode diagonal hand solve and auto rule") {
    Matrix v_e(2, 2);
    v_e(0, 0) = 4.0;
    v_e(1, 1) = 1.0;
    const auto [u, spectrum] = solve_mode(v_e, Matrix::identity(2), 0.0, 1);
    CHECK(u.cols() == 1);
    CHECK(std::abs(u(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(u(1, 0)) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(spectrum[0] == doctest::Approx(4.0).epsilon(1e-12));

    // v_e = v_i SPD -> all generalized eigenvalues 1, auto keeps one column
    Xoshiro256pp rng(3);
    const Matrix spd = random_spd(4, rng);
    const auto [u_auto, spec_auto] = solve_mode(spd, spd, 0.0, std::nullopt);
    CHECK(u_auto.cols() == 1);
    for (double v : spec_auto) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS((void)solve_mode(v_e, Matrix::identity(2), 0.0, 3), ArgumentError);
}

TEST_CASE("solve_mode maximizes the ratio-trace objective over random frames") {
    // The returned width-d frame attains sum of the top d generalized
    // eigenvalues of (V_E, V_I + lambda I); for any other frame U the
    // ratio-trace Tr((U^T B U)^-1 (U^T E U)) cannot exceed it.
    Xoshiro256pp rng(41);
    const Matrix e = random_spd(5, rng);
    const Matrix b = random_spd(5, rng);
    const double lambda = 0.1;
    const std::size_t d = 2;
    const auto [u, spectrum] = solve_mode(e, b, lambda, d);
    const double best = spectrum[0] + spectrum[1];

    Matrix breg = b;
    for (std::size_t i = 0; i < 5; ++i) breg(i, i) += lambda;

    auto ratio_trace_2d = [&](const Matrix& cand) {
        const Matrix me = transpose_times(cand, e * cand);
        const Matrix mb = transpose_times(cand, breg * cand);
        const double det = mb(0, 0) * mb(1, 1) - mb(0, 1) * mb(1, 0);
        // Tr(mb^-1 me) for 2x2
        return (mb(1, 1) * me(0, 0) - mb(0, 1) * me(1, 0) - mb(1, 0) * me(0, 1) +
                mb(0, 0) * me(1, 1)) /
               det;
    };

    CHECK(ratio_trace_2d(u) == doctest::Approx(best).epsilon(1e-9));
    for (int rep = 0; rep < 100; ++rep) {
        const Matrix cand = random_matrix(5, d, rng);
        CHECK(ratio_trace_2d(cand) <= best + 1e-9);
    }

    // width-1 case: the plain trace ratio is a Rayleigh quotient, so the
    // returned direction also beats random unit vectors on it.
    const auto [u1, spec1] = solve_mode(e, b, lambda, 1);
    auto rayleigh = [&](const Matrix& cand) {
        const Matrix me = transpose_times(cand, e * cand);
        const Matrix mb = transpose_times(cand, breg * cand);
        return me(0, 0) / mb(0, 0);
    };
    CHECK(rayleigh(u1) == doctest::Approx(spec1[0]).epsilon(1e-9));
    for (int rep = 0; rep < 100; ++rep) {
        const Matrix cand = random_matrix(5, 1, rng);
        CHECK(rayleigh(cand) <= spec1[0] + 1e-9);
    }
}

TEST_CASE("fit: single pass matches one XQDA-style solve per mode") {
    const CrossViewSet set = make_set(4, 2, 5, 3, 1.0, 0.4, 57);
    TxqdaConfig cfg;
    cfg.max_iters = 1;
    const ProjectionSet p = fit(set, cfg);
    CHECK(p.iterations == 1);
    CHECK(p.objective1.size() == 1);
    CHECK(p.objective2.size() == 1);

    const ScatterPair sp1 = scatter_pair(set, Matrix::identity(3), 1);
    const auto [u1, spec1] = solve_mode(sp1.extrinsic, sp1.intrinsic, p.lambda1, std::nullopt);
    CHECK(rel_error(p.u1, u1) == 0.0);
}

TEST_CASE("fit: mode-2 without class signal yields dominant mode-1 eigenvalue") {
    // class-dependent mode-1 means, i.i.d. noise elsewhere; statistically
    // the top mode-1 eigenvalue dominates every mode-2 eigenvalue.
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CrossViewSet set = make_set(5, 2, 6, 3, 2.0, 0.5, 900 + seed);
        const ProjectionSet p = fit(set, TxqdaConfig{});
        if (p.spectrum1.front() > p.spectrum2.front()) ++wins;
    }
    CHECK(wins >= 18);
}

TEST_CASE("fit: degenerate single-feature tensor reduces learning to mode 2") {
    const CrossViewSet set = make_set(3, 2, 1, 4, 1.0, 0.3, 77);
    const ProjectionSet p = fit(set, TxqdaConfig{});
    CHECK(p.u1.rows() == 1);
    CHECK(p.u1.cols() == 1);
    CHECK(p.u1(0, 0) > 0.0);  // spans the whole 1-d mode, positive scale
    CHECK(p.u2.rows() == 4);
}

TEST_CASE("fit: recorded objectives are non-decreasing per mode") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CrossViewSet set = make_set(4, 2, 5, 3, 1.5, 0.6, 200 + seed);
        TxqdaConfig cfg;
        cfg.target_dims = {{3, 2}};
        cfg.max_iters = 6;
        cfg.tol = 0.0;  // force full iteration unless improvement stalls
        const ProjectionSet p = fit(set, cfg);
        for (std::size_t i = 1; i < p.objective1.size(); ++i)
            CHECK(p.objective1[i] >= p.objective1[i - 1] - 1e-9);
        for (std::size_t i = 1; i < p.objective2.size(); ++i)
            CHECK(p.objective2[i] >= p.objective2[i - 1] - 1e-9);
    }
}

TEST_CASE("fit: sample permutation leaves the projected subspaces invariant") {
    const CrossViewSet set = make_set(4, 2, 5, 3, 1.2, 0.4, 303);
    TxqdaConfig cfg;
    cfg.target_dims = {{3, 2}};
    const ProjectionSet base = fit(set, cfg);

    Xoshiro256pp rng(9);
    std::vector<std::size_t> perm(set.samples());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    shuffle(perm, rng);
    CrossViewSet permuted;
    permuted.tensor = set.tensor.select_slices(perm);
    for (std::size_t i : perm) {
        permuted.person_ids.push_back(set.person_ids[i]);
        permuted.camera_ids.push_back(set.camera_ids[i]);
    }
    permuted.view_a_camera = set.view_a_camera;
    const ProjectionSet shuffled = fit(permuted, cfg);

    CHECK((projector(base.u1) - projector(shuffled.u1)).frobenius() < 1e-9);
    CHECK((projector(base.u2) - projector(shuffled.u2)).frobenius() < 1e-9);
}

TEST_CASE("fit: bijective person relabeling is bitwise invariant") {
    const CrossViewSet set = make_set(4, 2, 5, 3, 1.2, 0.4, 404);
    CrossViewSet renamed = set;
    for (auto& p : renamed.person_ids) p = "person-" + p + "-x";
    const ProjectionSet a = fit(set, TxqdaConfig{});
    const ProjectionSet b = fit(renamed, TxqdaConfig{});
    CHECK(a.u1 == b.u1);
    CHECK(a.u2 == b.u2);
    CHECK(a.objective1 == b.objective1);
    CHECK(a.objective2 == b.objective2);
}

TEST_CASE("fit: unpaired persons produce warnings, not silent drops") {
    CrossViewSet set = make_set(4, 1, 3, 2, 1.0, 0.4, 505);
    for (std::size_t i = 0; i < set.samples(); ++i)
        if (set.person_ids[i] == "p1" && set.camera_ids[i] == "cam2")
            set.camera_ids[i] = "cam1";
    const ProjectionSet p = fit(set, TxqdaConfig{});
    REQUIRE(p.warnings.size() == 1);
    CHECK(p.warnings[0].find("p1") != std::string::npos);
}

TEST_CASE("fit validates config") {
    const CrossViewSet set = make_set(3, 1, 3, 2, 1.0, 0.3, 606);
    TxqdaConfig bad;
    bad.max_iters = 0;
    CHECK_THROWS_AS((void)fit(set, bad), ArgumentError);
    bad = TxqdaConfig{};
    bad.lambda = -1.0;
    CHECK_THROWS_AS((void)fit(set, bad), ArgumentError);
    bad = TxqdaConfig{};
    bad.target_dims = {{10, 2}};
    CHECK_THROWS_AS((void)fit(set, bad), ArgumentError);
}

TEST_CASE("transform applies the learned projection per slice") {
    const CrossViewSet set = make_set(3, 2, 4, 3, 1.0, 0.4, 707);
    TxqdaConfig cfg;
    cfg.target_dims = {{2, 2}};
    const ProjectionSet p = fit(set, cfg);
    const Tensor3 reduced = transform(p, set.tensor);
    CHECK(reduced.dims() == Dims3{2, 2, set.tensor.dim(3)});
    for (std::size_t i = 0; i < set.tensor.dim(3); ++i) {
        const Matrix want = transpose_times(p.u1, set.tensor.slice(i)) * p.u2;
        CHECK(rel_error(reduced.slice(i), want) < 1e-12);
    }

    // identity projections leave the tensor unchanged
    ProjectionSet id;
    id.u1 = Matrix::identity(4);
    id.u2 = Matrix::identity(3);
    CHECK(transform(id, set.tensor) == set.tensor);

    // orthonormal square projections preserve the Frobenius norm
    Xoshiro256pp rng(13);
    ProjectionSet ortho;
    ortho.u1 = sym_eig(test::random_symmetric(4, rng)).vectors;
    ortho.u2 = sym_eig(test::random_symmetric(3, rng)).vectors;
    const Tensor3 rotated = transform(ortho, set.tensor);
    CHECK(frobenius(rotated) ==
          doctest::Approx(frobenius(set.tensor)).epsilon(1e-10));

    CHECK_THROWS_AS((void)transform(p, Tensor3({5, 3, 2})), ArgumentError);
}
