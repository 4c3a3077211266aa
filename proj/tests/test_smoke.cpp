#include <catch2/catch_amalgamated.hpp>

#include "cmc/cmc.hpp"

TEST_CASE("umbrella header compiles and basic objects construct", "[smoke]") {
    const cmc::SurfaceParams params{3, cmc::pi / 4.0};
    REQUIRE(params.t() == Catch::Approx(1.0 / 6.0));
    const cmc::PotentialCoeffs central = cmc::central_value(params, 4);
    REQUIRE(central.r == Catch::Approx(std::cos(cmc::pi / 4.0)));
}
