#include <stdexcept>

#include "doctest.h"
#include "ppc450/golden.hpp"

using namespace ppc450;

TEST_SUITE("golden") {

TEST_CASE("requirements table") {
    auto t = load_golden("table2");
    CHECK(t.row_order.size() == 12);
    CHECK(t.at("27-mm-2x3", "frame") == 20);
    CHECK(t.at("27-mm-2x3", "loads") == 40);
    CHECK(t.at("27-mm-2x3", "stores") == 6);
    CHECK(t.at("27-mm-2x3", "fpu_cycles") == 162);
    CHECK(t.at("27-mm-2x3", "bytes_per_stencil") == doctest::Approx(34.7));
    CHECK(t.reference_only.empty());
}

TEST_CASE("predictions table") {
    auto t = load_golden("table3");
    CHECK(t.at("3-lc-2x1", "naive") == doctest::Approx(425.00));
    CHECK(t.at("3-lc-2x1", "simulated") == doctest::Approx(147.29));
    CHECK(t.reference_only.count("l1_observed"));
    CHECK(t.reference_only.count("stream_observed"));
    CHECK(t.row_order.front() == "27-mm-1x1");
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(load_golden("table9"), std::invalid_argument);
    CHECK_THROWS_AS(parse_golden("table2", "config,frame\n27-mm-1x1,9\n"), std::runtime_error);
    CHECK_THROWS_AS(load_golden("table2").at("27-mm-9x9", "frame"), std::out_of_range);
}

}
