#include <doctest.h>

#include <cmath>

#include "treid/error.hpp"
#include "treid/matching.hpp"

#include "test_support.hpp"

using namespace treid;

namespace {

// Tensor whose mode-3 slices are the given row vectors (1 x d slices).
Tensor3 from_rows(const std::vector<std::vector<double>>& rows) {
    Tensor3 t({1, rows.front().size(), rows.size()});
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) t(0, j, i) = rows[i][j];
    return t;
}

}  // namespace

TEST_CASE("cosine basics") {
    const std::vector<double> v = {1.0, 2.0, -3.0};
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) == 0.0);
    // hand arithmetic: 32 / (sqrt(14) sqrt(77))
    const double want = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
    CHECK(cosine(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{4.0, 5.0, 6.0}) ==
          doctest::Approx(want).epsilon(1e-12));
    CHECK(doctest::Approx(0.974632).epsilon(1e-6) == want);

    bool degenerate = false;
    CHECK(cosine(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}, &degenerate) ==
          0.0);
    CHECK(degenerate);
    CHECK_THROWS_AS((void)cosine(v, std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("cosine scale invariance under positive rescaling") {
    Xoshiro256pp rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
        for (auto& v : y) v = 2.0 * rng.uniform() - 1.0;
        const double alpha = 0.01 + 10.0 * rng.uniform();
        const double beta = 0.01 + 10.0 * rng.uniform();
        std::vector<double> xs(5), ys(5);
        for (std::size_t i = 0; i < 5; ++i) {
            xs[i] = alpha * x[i];
            ys[i] = beta * y[i];
        }
        CHECK(std::abs(cosine(x, y) - cosine(xs, ys)) < 1e-12);
    }
}

TEST_CASE("score_and_rank orders by similarity with index tie-break") {
    // gallery: e1, e2, e3; probe equal to e2 -> rank (2,?,?) with score 1
    const Tensor3 gallery =
        from_rows({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
    const std::vector<std::string> gal_ids = {"a", "b", "c"};
    const Tensor3 probe = from_rows({{0.0, 1.0, 0.0}});
    const std::vector<std::string> probe_ids = {"b"};

    const RankingResult r = score_and_rank(gallery, gal_ids, probe, probe_ids);
    CHECK(r.order[0][0] == 1);
    CHECK(r.scores[0][0] == doctest::Approx(1.0));
    // orthogonal gallery entries tie at 0 -> ascending index
    CHECK(r.order[0][1] == 0);
    CHECK(r.order[0][2] == 2);

    // all-equal scores -> ranking = ascending gallery index
    const Tensor3 same = from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    const RankingResult tie = score_and_rank(same, gal_ids, from_rows({{1.0, 1.0}}), probe_ids);
    CHECK(tie.order[0] == std::vector<std::size_t>{0, 1, 2});

    CHECK_THROWS_AS(
        (void)score_and_rank(gallery, gal_ids, Tensor3({1, 2, 1}), probe_ids), ArgumentError);
}

TEST_CASE("hand-computed similarity triple sorts as (2,3,1)") {
    // picks vectors whose cosines against the probe are 0.2, 0.9, 0.5
    const double c1 = 0.2, c2 = 0.9, c3 = 0.5;
    auto make = [](double c) {
        return std::vector<double>{c, std::sqrt(1.0 - c * c)};
    };
    const Tensor3 gallery = from_rows({make(c1), make(c2), make(c3)});
    const Tensor3 probe = from_rows({{1.0, 0.0}});
    const std::vector<std::string> gal_ids = {"g1", "g2", "g3"};
    const std::vector<std::string> probe_ids = {"g2"};
    const RankingResult r = score_and_rank(gallery, gal_ids, probe, probe_ids);
    CHECK(r.order[0] == std::vector<std::size_t>{1, 2, 0});  // 1-based (2,3,1)
    CHECK(r.scores[0][0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(r.scores[0][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.scores[0][2] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("ranking is deterministic and thread-count independent") {
    Xoshiro256pp rng(77);
    Tensor3 gallery({2, 3, 8});
    for (double& v : gallery.data()) v = 2.0 * rng.uniform() - 1.0;
    Tensor3 probes({2, 3, 5});
    for (double& v : probes.data()) v = 2.0 * rng.uniform() - 1.0;
    std::vector<std::string> gal_ids, probe_ids;
    for (int i = 0; i < 8; ++i) gal_ids.push_back("g" + std::to_string(i));
    for (int i = 0; i < 5; ++i) probe_ids.push_back("g" + std::to_string(i));

    const RankingResult serial = score_and_rank(gallery, gal_ids, probes, probe_ids, 1);
    const RankingResult parallel = score_and_rank(gallery, gal_ids, probes, probe_ids, 4);
    CHECK(serial.order == parallel.order);
    CHECK(serial.scores == parallel.scores);
    for (const auto& row : serial.scores)
        for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i - 1] >= row[i]);
}

TEST_CASE("cmc hand count and edge behavior") {
    // 4 probes with correct-match ranks (1, 2, 2, 5)
    RankingResult r;
    r.gallery_person_ids = {"p1", "p2", "p3", "p4", "p5"};
    r.probe_person_ids = {"p1", "p2", "p3", "p4"};
    r.order = {
        {0, 1, 2, 3, 4},  // correct at rank 1
        {0, 1, 2, 3, 4},  // correct at rank 2
        {0, 2, 1, 3, 4},  // correct at rank 2
        {0, 1, 2, 4, 3},  // correct at rank 5
    };
    r.scores.assign(4, {1.0, 0.8, 0.6, 0.4, 0.2});

    const CmcCurve c = cmc(r, 5);
    REQUIRE(c.values.size() == 5);
    CHECK(c.values[0] == doctest::Approx(0.25));
    CHECK(c.values[1] == doctest::Approx(0.75));
    CHECK(c.values[2] == doctest::Approx(0.75));
    CHECK(c.values[3] == doctest::Approx(0.75));
    CHECK(c.values[4] == doctest::Approx(1.0));

    const auto row = rank_k(c, std::vector<int>{1, 5});
    CHECK(row[0] == doctest::Approx(25.0));
    CHECK(row[1] == doctest::Approx(100.0));
    const auto cells = format_rank_row(c, std::vector<int>{1, 5});
    CHECK(cells[0] == "25.00");
    CHECK(cells[1] == "100.00");

    CHECK_THROWS_AS((void)rank_k(c, std::vector<int>{6}), ArgumentError);
    CHECK_THROWS_AS((void)cmc(r, 6), ArgumentError);
}

TEST_CASE("cmc rejects open-set probes listing the offenders") {
    RankingResult r;
    r.gallery_person_ids = {"p1", "p2"};
    r.probe_person_ids = {"p1", "ghost"};
    r.order = {{0, 1}, {0, 1}};
    r.scores.assign(2, {1.0, 0.5});
    try {
        (void)cmc(r, 2);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("cmc monotonic with terminal value 1 on random closed-set fixtures") {
    Xoshiro256pp rng(123);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t gal = 2 + rng.bounded(10);
        const std::size_t probes = 1 + rng.bounded(6);
        RankingResult r;
        for (std::size_t g = 0; g < gal; ++g)
            r.gallery_person_ids.push_back("p" + std::to_string(g));
        for (std::size_t p = 0; p < probes; ++p) {
            r.probe_person_ids.push_back("p" + std::to_string(rng.bounded(gal)));
            std::vector<std::size_t> order(gal);
            for (std::size_t i = 0; i < gal; ++i) order[i] = i;
            shuffle(order, rng);
            r.order.push_back(order);
            std::vector<double> scores(gal);
            for (std::size_t i = 0; i < gal; ++i)
                scores[i] = 1.0 - static_cast<double>(i) / static_cast<double>(gal);
            r.scores.push_back(scores);
        }
        const CmcCurve c = cmc(r, gal);
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            CHECK(c.values[i] >= 0.0);
            CHECK(c.values[i] <= 1.0);
            if (i > 0) CHECK(c.values[i] >= c.values[i - 1]);
        }
        CHECK(c.values.back() == doctest::Approx(1.0));

        // all-correct-at-rank-1 fixture -> curve of all ones
        RankingResult perfect = r;
        for (std::size_t p = 0; p < probes; ++p) {
            // move the correct gallery entry to the front
            auto& order = perfect.order[p];
            for (std::size_t i = 0; i < gal; ++i) {
                if (perfect.gallery_person_ids[order[i]] == perfect.probe_person_ids[p]) {
                    std::swap(order[0], order[i]);
                    break;
                }
            }
        }
        const CmcCurve ones = cmc(perfect, gal);
        CHECK(ones.values.front() == doctest::Approx(1.0));
    }
}
