#include <doctest.h>

#include <cmath>
#include <random>

#include "fedsim/topology.hpp"

using namespace fedsim;

TEST_CASE("distance: known geometries") {
    CHECK(distance({0, 0}, {3, 4}).value == doctest::Approx(5.0));
    CHECK(distance({7, -2}, {7, -2}).value == 0.0);
    // hand-evaluated sqrt(3^2 + 4^2)
    CHECK(distance({1, 1}, {4, 5}).value == doctest::Approx(5.0));
}

TEST_CASE("distance: rejects non-finite coordinates") {
    CHECK_THROWS_WITH_AS(distance({std::nan(""), 0}, {0, 0}), doctest::Contains("InvalidCoordinate"),
                         SimError);
    CHECK_THROWS_AS(distance({0, 0}, {std::numeric_limits<double>::infinity(), 1}), SimError);
    try {
        distance({0, 0}, {1, std::nan("")});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::invalid_coordinate);
    }
}

TEST_CASE("transfer_time: division and error paths") {
    CHECK(transfer_time(NetworkDistance{10}, NetworkSpeed{2}) == doctest::Approx(5.0));
    CHECK(transfer_time(NetworkDistance{0}, NetworkSpeed{7}) == 0.0);
    CHECK(transfer_time(NetworkDistance{5}, NetworkSpeed{0.5}) == doctest::Approx(10.0));
    try {
        transfer_time(NetworkDistance{1}, NetworkSpeed{0});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::invalid_speed);
    }
    CHECK_THROWS_AS(transfer_time(NetworkDistance{1}, NetworkSpeed{-3}), SimError);
}

TEST_CASE("distance: symmetry and triangle inequality on random triples") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-100.0, 100.0);
    for (int i = 0; i < 500; ++i) {
        Coordinate a{coord(rng), coord(rng)};
        Coordinate b{coord(rng), coord(rng)};
        Coordinate c{coord(rng), coord(rng)};
        CHECK(distance(a, b).value == distance(b, a).value);
        CHECK(distance(a, c).value <= distance(a, b).value + distance(b, c).value + 1e-9);
        CHECK(distance(a, b).value >= 0.0);
    }
}

TEST_CASE("transfer_time: monotone in distance and speed") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0.01, 50.0);
    for (int i = 0; i < 200; ++i) {
        double d = pos(rng);
        double extra = pos(rng);
        double s = pos(rng);
        CHECK(transfer_time(NetworkDistance{d + extra}, NetworkSpeed{s}) >=
              transfer_time(NetworkDistance{d}, NetworkSpeed{s}));
        CHECK(transfer_time(NetworkDistance{d}, NetworkSpeed{s + extra}) <=
              transfer_time(NetworkDistance{d}, NetworkSpeed{s}));
    }
}

TEST_CASE("speed table: per-pair overrides with default fallback") {
    SpeedTable table(NetworkSpeed{2.5});
    table.set_link("u", "gw", NetworkSpeed{4.0});
    CHECK(table.between("u", "gw").value == 4.0);
    CHECK(table.between("gw", "u").value == 2.5); // ordered pairs
    CHECK(table.between("x", "y").value == 2.5);
    CHECK_THROWS_AS(table.set_link("a", "b", NetworkSpeed{0.0}), SimError);
    CHECK_THROWS_AS(SpeedTable(NetworkSpeed{-1.0}), SimError);
}
