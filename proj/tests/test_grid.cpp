#include <cstdio>
#include <filesystem>

#include "doctest.h"

#include "bevnav/grid.hpp"

using namespace bevnav;

TEST_CASE("world_to_cell maps the origin to the center cell") {
  GridSpec spec;
  const auto c = world_to_cell(spec, 0.0, 0.0);
  REQUIRE(c.has_value());
  CHECK(c->row == 64);
  CHECK(c->col == 64);
}

TEST_CASE("world_to_cell upper bound is half open") {
  GridSpec spec;
  CHECK_FALSE(world_to_cell(spec, 6.4, 0.0).has_value());
  CHECK_FALSE(world_to_cell(spec, 0.0, 6.4).has_value());
  CHECK(world_to_cell(spec, -6.4, 0.0).has_value());
}

TEST_CASE("world_to_cell floor formula") {
  GridSpec spec;
  const auto c = world_to_cell(spec, -6.4, -6.35);
  REQUIRE(c.has_value());
  CHECK(c->row == 0);
  CHECK(c->col == 0);
}

TEST_CASE("cell_center of center and corner cells") {
  GridSpec spec;
  double x, y;
  cell_center(spec, 64, 64, x, y);
  CHECK(x == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(y == doctest::Approx(0.05).epsilon(1e-9));
  cell_center(spec, 0, 0, x, y);
  CHECK(x == doctest::Approx(-6.35).epsilon(1e-9));
  CHECK(y == doctest::Approx(-6.35).epsilon(1e-9));
  CHECK_THROWS_AS(cell_center(spec, 128, 0, x, y), std::out_of_range);
}

TEST_CASE("cell round trip over the whole grid") {
  GridSpec spec;
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      double x, y;
      cell_center(spec, r, c, x, y);
      const auto back = world_to_cell(spec, x, y);
      REQUIRE(back.has_value());
      REQUIRE(back->row == r);
      REQUIRE(back->col == c);
    }
  }
}

TEST_CASE("grid spec validation") {
  GridSpec bad;
  bad.bound = 6.4;
  bad.cell = 0.3;  // 2*bound/cell is not an integer
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  GridSpec good;
  CHECK_NOTHROW(good.validate());
  CHECK(good.rows() == 128);
}

TEST_CASE("bevmap binary round trip") {
  GridSpec spec;
  spec.bound = 0.8;
  spec.cell = 0.1;  // 16x16
  BevMap map(spec, 3);
  for (size_t i = 0; i < map.data.size(); ++i) map.data[i] = 0.25f * static_cast<float>(i);

  const std::string path = (std::filesystem::temp_directory_path() / "bevmap_rt.bin").string();
  save_bevmap(map, path);
  const BevMap back = load_bevmap(path);
  CHECK(back.spec.rows() == 16);
  CHECK(back.channels == 3);
  CHECK(back.data == map.data);
  std::filesystem::remove(path);
}

TEST_CASE("bevmap loader rejects garbage") {
  const std::string path = (std::filesystem::temp_directory_path() / "bevmap_bad.bin").string();
  {
    FILE* f = fopen(path.c_str(), "wb");
    fputs("not a map file at all, short header", f);
    fclose(f);
  }
  CHECK_THROWS(load_bevmap(path));
  std::filesystem::remove(path);
}
