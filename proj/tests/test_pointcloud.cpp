#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "topogen/error.hpp"
#include "topogen/pointcloud.hpp"

using namespace topogen;
using namespace testutil;

TEST_CASE("load_csv parses a two-column file") {
    std::string dir = fresh_dir("pc_load");
    std::string path = write_file(dir, "ab.csv", "a,b\n0,0\n1,1\n");
    PointCloud pc = load_csv(path);
    CHECK(pc.size() == 2);
    CHECK(pc.dim() == 2);
    CHECK(pc.columns == std::vector<std::string>{"a", "b"});
    CHECK(pc.points(1, 0) == 1.0);
    CHECK(pc.labels.empty());
}

TEST_CASE("load_csv with a 31-column schema selects 29 features plus a label") {
    std::string dir = fresh_dir("pc_wide");
    std::string header = "Time";
    std::vector<std::string> features;
    for (int i = 1; i <= 28; ++i) {
        features.push_back("V" + std::to_string(i));
        header += "," + features.back();
    }
    features.push_back("Amount");
    header += ",Amount,Class";
    std::string body;
    for (int r = 0; r < 3; ++r) {
        body += std::to_string(r);
        for (int c = 0; c < 29; ++c) body += "," + std::to_string(r + c) + ".5";
        body += r == 1 ? ",1\n" : ",0\n";
    }
    std::string path = write_file(dir, "wide.csv", header + "\n" + body);
    PointCloud pc = load_csv(path, features, "Class");
    CHECK(pc.size() == 3);
    CHECK(pc.dim() == 29);
    CHECK(pc.label_name == "Class");
    CHECK(pc.labels == std::vector<double>{0, 1, 0});
    CHECK(pc.points(0, 0) == 0.5); // V1, not Time
}

TEST_CASE("load_csv error cases name the offending location") {
    std::string dir = fresh_dir("pc_err");
    CHECK_THROWS_WITH_AS(load_csv(dir + "/nope.csv"), doctest::Contains("nope.csv"), InputError);

    std::string bad_cell = write_file(dir, "bad.csv", "a,b\n1,2\n3,abc\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_cell), doctest::Contains("b"), InputError);
    try {
        load_csv(bad_cell);
    } catch (const InputError& e) {
        std::string msg = e.what();
        CHECK(msg.find(":3") != std::string::npos); // line 3 of the file
        CHECK(msg.find("abc") != std::string::npos);
    }

    std::string ragged = write_file(dir, "ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(ragged), InputError);

    std::string header_only = write_file(dir, "empty.csv", "a,b\n");
    CHECK_THROWS_AS(load_csv(header_only), InputError);

    std::string ok = write_file(dir, "ok.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(ok, {"missing"}, ""), InputError);
    CHECK_THROWS_AS(load_csv(ok, {"a"}, "a"), InputError); // feature and label at once
    CHECK_THROWS_WITH_AS(load_csv(write_file(dir, "inf.csv", "a\ninf\n")),
                         doctest::Contains("inf"), InputError);
}

TEST_CASE("pairwise_distances matches hand values and the brute-force oracle") {
    PointCloud pc = cloud_from_rows({{0, 0}, {3, 4}});
    DistanceMatrix d = pairwise_distances(pc);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == 5.0);
    CHECK(d(1, 0) == 5.0);

    PointCloud one = cloud_from_rows({{7, 8}});
    DistanceMatrix d1 = pairwise_distances(one);
    CHECK(d1.size() == 1);
    CHECK(d1(0, 0) == 0.0);

    Rng rng(42);
    PointCloud r = random_cloud(5, 3, rng);
    DistanceMatrix dr = pairwise_distances(r);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) {
                double diff = r.points(i, k) - r.points(j, k);
                s += diff * diff;
            }
            CHECK(dr(i, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
            CHECK(dr(i, j) == dr(j, i));
        }
}

TEST_CASE("pairwise_distances satisfies the triangle inequality on sampled triples") {
    Rng rng(7);
    PointCloud pc = random_cloud(40, 5, rng);
    DistanceMatrix d = pairwise_distances(pc);
    for (int t = 0; t < 500; ++t) {
        int i = static_cast<int>(rng.index(40));
        int j = static_cast<int>(rng.index(40));
        int k = static_cast<int>(rng.index(40));
        CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-9);
    }
}

TEST_CASE("sample_batch draws without replacement, deterministically") {
    Rng rng(3);
    PointCloud pc = random_cloud(20, 2, rng);

    PointCloud all = sample_batch(pc, 20, 5);
    auto key = [](const PointCloud& c) {
        std::multiset<std::pair<double, double>> s;
        for (int i = 0; i < c.size(); ++i) s.insert({c.points(i, 0), c.points(i, 1)});
        return s;
    };
    CHECK(key(all) == key(pc)); // m = n is a permutation

    PointCloud a = sample_batch(pc, 1, 11);
    PointCloud b = sample_batch(pc, 1, 11);
    CHECK(a.points == b.points);

    CHECK_THROWS_AS(sample_batch(pc, 21, 0), InputError);
    CHECK_THROWS_AS(sample_batch(pc, 0, 0), InputError);
}

TEST_CASE("sample_batch seeds are independent across 100 trials") {
    Rng rng(9);
    PointCloud pc = random_cloud(1000, 2, rng);
    int differing = 0;
    for (int t = 0; t < 100; ++t) {
        PointCloud a = sample_batch(pc, 64, 2 * static_cast<uint64_t>(t));
        PointCloud b = sample_batch(pc, 64, 2 * static_cast<uint64_t>(t) + 1);
        auto key = [](const PointCloud& c) {
            std::multiset<double> s;
            for (int i = 0; i < c.size(); ++i) s.insert(c.points(i, 0) + 3.0 * c.points(i, 1));
            return s;
        };
        if (key(a) != key(b)) ++differing;
    }
    // Two independent 64-of-1000 draws collide with negligible probability.
    CHECK(differing == 100);
}

TEST_CASE("standardize centers and scales, with the constant-column convention") {
    PointCloud two = cloud_from_rows({{0}, {2}});
    PointCloud st = standardize(two);
    CHECK(st.points(0, 0) == -1.0);
    CHECK(st.points(1, 0) == 1.0);

    PointCloud constant = cloud_from_rows({{5}, {5}, {5}});
    PointCloud zc = standardize(constant);
    for (int i = 0; i < 3; ++i) CHECK(zc.points(i, 0) == 0.0);

    Rng rng(17);
    PointCloud r = random_cloud(10, 3, rng, -4.0, 9.0);
    PointCloud s = standardize(r);
    for (int c = 0; c < 3; ++c) {
        double mean = 0, sq = 0;
        for (int i = 0; i < 10; ++i) mean += s.points(i, c);
        mean /= 10;
        for (int i = 0; i < 10; ++i) {
            double d = s.points(i, c) - mean;
            sq += d * d;
        }
        double sd = std::sqrt(sq / 10);
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(sd - 1.0) < 1e-12);
    }

    PointCloud twice = standardize(s);
    for (int i = 0; i < 10; ++i)
        for (int c = 0; c < 3; ++c)
            CHECK(twice.points(i, c) == doctest::Approx(s.points(i, c)).epsilon(1e-12));

    CHECK_THROWS_AS(standardize(cloud_from_rows({{1, 2}})), InputError);
}

TEST_CASE("save_csv and load_csv round-trip doubles exactly") {
    std::string dir = fresh_dir("pc_rt");
    Rng rng(23);
    PointCloud pc = random_cloud(30, 4, rng, -1e3, 1e3);
    pc.points(0, 0) = 1.0 / 3.0;
    pc.points(0, 1) = 0.1;
    pc.points(0, 2) = 1e-17;
    pc.points(0, 3) = -0.0;
    pc.columns = {"w", "x", "y", "z"};
    std::string path = (std::filesystem::path(dir) / "rt.csv").string();
    save_csv(pc, path);
    PointCloud back = load_csv(path);
    CHECK(back.points == pc.points);
    CHECK(back.columns == pc.columns);
}
