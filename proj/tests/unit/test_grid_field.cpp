#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "nswlab/error.hpp"
#include "nswlab/grid_field.hpp"

using namespace nswlab;

TEST_CASE("grid geometry") {
  GridField f(2.0, 8, 3, 0.25);
  CHECK(f.h() == 0.5);
  CHECK(f.h() * f.N() == 2.0 * f.L());
  CHECK(f.coord(0) == -1.75);
  CHECK(f.coord(7) == 1.75);
  CHECK(f.points() == 512);
  CHECK(f.data().size() == 3 * 512);
  CHECK(*f.time() == 0.25);
  CHECK_THROWS_AS(GridField(1.0, 12, 1), Error);
  CHECK_THROWS_AS(GridField(-1.0, 8, 1), Error);
  CHECK_THROWS_AS(GridField(1.0, 8, 2), Error);
}

TEST_CASE("axis weights cover the interval exactly") {
  const auto aw = axis_weights(2.0, 8, -0.3, 1.1);
  double s = 0.0;
  for (double w : aw.w) s += w;
  CHECK(s == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(aw.first == 3);
  CHECK(aw.w.front() == doctest::Approx(0.3));
  const auto full = axis_weights(2.0, 8, -2.0, 2.0);
  CHECK(full.w.size() == 8);
  for (double w : full.w) CHECK(w == 0.5);
}

TEST_CASE("cube weights reject cubes outside the box") {
  GridField f(2.0, 8, 1);
  CHECK_THROWS_AS(cube_weights(f, Cube{{1.5, 0, 0}, 2.0}), Error);
  try {
    cube_weights(f, Cube{{1.5, 0, 0}, 2.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain_mismatch);
  }
  CHECK_NOTHROW(cube_weights(f, Cube{{0, 0, 0}, 4.0}));
}

TEST_CASE("ball weights approximate the ball volume") {
  for (int N : {32, 64}) {
    const auto bw = ball_weights(4.0, N, {0.1, -0.2, 0.3}, 2.5);
    double v = 0.0;
    for (double w : bw.frac) v += w;
    const double h = 8.0 / N;
    v *= h * h * h;
    CHECK(v == doctest::Approx(4.0 / 3.0 * M_PI * 2.5 * 2.5 * 2.5).epsilon(2e-3));
  }
}

TEST_CASE("NSWF round trip is bit exact") {
  GridField f(3.5, 4, 3, 1.25);
  for (std::size_t i = 0; i < f.data().size(); ++i) f.data()[i] = std::sin(0.37 * i) * 1e-3 * i;
  std::stringstream ss;
  write_nswf(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 * 3 + 16 + 3 * 64 * 8);
  CHECK(bytes.substr(0, 4) == "NSWF");
  const auto g = read_nswf(ss);
  CHECK(g.L() == f.L());
  CHECK(g.N() == 4);
  CHECK(g.ncomp() == 3);
  CHECK(*g.time() == 1.25);
  CHECK(g.data() == f.data());

  GridField s(1.0, 2, 1);
  std::stringstream s2;
  write_nswf(s2, s);
  CHECK_FALSE(read_nswf(s2).time().has_value());
}

TEST_CASE("NSWF header layout is little endian") {
  GridField f(1.0, 2, 1);
  std::stringstream ss;
  write_nswf(ss, f);
  const std::string b = ss.str();
  CHECK(static_cast<unsigned char>(b[4]) == 1);  // version
  CHECK(static_cast<unsigned char>(b[8]) == 2);  // N
  CHECK(static_cast<unsigned char>(b[12]) == 1); // components
}

TEST_CASE("NSWF rejects corrupt input") {
  std::stringstream bad("NSWX....");
  CHECK_THROWS_AS(read_nswf(bad), Error);
  GridField f(1.0, 2, 1);
  std::stringstream ss;
  write_nswf(ss, f);
  std::string b = ss.str();
  b[4] = 2;
  std::stringstream v2(b);
  CHECK_THROWS_WITH_AS(read_nswf(v2), doctest::Contains("version"), Error);
  std::stringstream cut(ss.str().substr(0, 30));
  CHECK_THROWS_AS(read_nswf(cut), Error);
  CHECK_THROWS_AS(load_nswf("/nonexistent/file.nswf"), Error);
}
