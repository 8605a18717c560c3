#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "merw/rng.hpp"

using namespace merw;

TEST_CASE("philox known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}) ==
        B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("bits_to_unit covers [0,1)") {
  CHECK(bits_to_unit(0) == 0.0);
  CHECK(bits_to_unit(~std::uint64_t{0}) < 1.0);
  CHECK(bits_to_unit(std::uint64_t{1} << 63) == 0.5);
}

TEST_CASE("stream cursor equals random access") {
  const CounterRng rng(42, 3, 1);
  UniformStream s(42, 3, 1);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(s.next() == rng.uniform(i));
  s.seek(17);
  CHECK(s.next() == rng.uniform(17));
  CHECK(s.position() == 18);
}

TEST_CASE("streams, lanes and seeds differ") {
  std::set<double> seen;
  for (std::uint64_t seed : {1, 2})
    for (std::uint32_t stream : {0u, 1u})
      for (std::uint32_t lane : {0u, 1u}) seen.insert(CounterRng(seed, stream, lane).uniform(0));
  CHECK(seen.size() == 8);
}

TEST_CASE("uniform moments") {
  UniformStream s(7, 0);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.next();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.005));
}
