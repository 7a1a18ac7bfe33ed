#include "amgae/tensor.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace amgae;

TEST_SUITE("tensor") {
    TEST_CASE("construction and element access") {
        Tensor t(2, 3, 1.5);
        CHECK(t.rows() == 2);
        CHECK(t.cols() == 3);
        CHECK(t.size() == 6);
        CHECK(t.at(1, 2) == 1.5);
        t.at(0, 1) = -2.0;
        CHECK(t.at(0, 1) == -2.0);
        CHECK(t.row(0)[1] == -2.0);
        CHECK(t.shape_str() == "2x3");
    }

    TEST_CASE("construction from data validates size") {
        CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
        Tensor ok(2, 2, std::vector<double>{1.0, 2.0, 3.0, 4.0});
        CHECK(ok.at(1, 0) == 3.0);
    }

    TEST_CASE("negative shape rejected") {
        CHECK_THROWS_AS(Tensor(-1, 3), std::invalid_argument);
    }

    TEST_CASE("all_finite flags NaN and Inf") {
        Tensor t(2, 2, 0.0);
        CHECK(t.all_finite());
        t.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_FALSE(t.all_finite());
        t.at(0, 1) = std::numeric_limits<double>::infinity();
        CHECK_FALSE(t.all_finite());
    }

    TEST_CASE("require_shape throws on mismatch") {
        Tensor t(2, 3);
        CHECK_NOTHROW(require_shape(t, 2, 3, "ok"));
        CHECK_THROWS_AS(require_shape(t, 3, 2, "bad"), std::invalid_argument);
    }
}
