#include "khess/errors.hpp"
#include "khess/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace khess;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "khess_test_io";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("profile CSV round trip is bit exact") {
    const auto grid = RadialGrid::log_uniform(1e-6, 0.1, 300);
    std::vector<double> u(grid.size()), du(grid.size()), d2u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        u[i] = std::log(grid[i]) / 3.0;
        du[i] = 1.0 / (3.0 * grid[i]);
        d2u[i] = -du[i] / grid[i];
    }
    const RadialProfile prof(grid, u, du, d2u);
    const auto path = scratch("profile.csv");
    io::write_atomic(path, io::profile_csv(prof));
    CHECK_FALSE(fs::exists(fs::path(path) += ".tmp"));
    const auto back = io::read_profile_csv(path);
    REQUIRE(back.size() == prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        CHECK(back.grid()[i] == grid[i]);
        CHECK(back.u()[i] == u[i]);
        CHECK(back.du()[i] == du[i]);
        CHECK((*back.d2u())[i] == d2u[i]);
    }
}

TEST_CASE("malformed CSV names the line") {
    const auto path = scratch("bad.csv");
    write(path, "r,u,du\n0.5,0,0\n0.75,abc,0\n1,0,0\n");
    try {
        io::read_profile_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    write(path, "r,u\n0.5,0\n1,0\n");
    CHECK_THROWS_AS(io::read_profile_csv(path), ParseError);
    write(path, "r,u,du\n0.5,0,0\n0.75,0\n1,0,0\n");
    CHECK_THROWS_AS(io::read_profile_csv(path), ParseError);
    write(path, "r,u,du\n0.5,0,0\n0.75,0,0\n0.9,0,0\n");
    CHECK_THROWS_AS(io::read_profile_csv(path), ParseError);  // last radius is not 1
    CHECK_THROWS_AS(io::read_profile_csv(scratch("missing.csv")), ParseError);
}

TEST_CASE("g table CSV round trip") {
    const auto t = Nonlinearity::tabulated({-3.0, -1.0, 0.0}, {5.0, 2.0, 1.0}, {-2.0, -1.0, -0.5});
    const auto path = scratch("g.csv");
    io::write_atomic(path, io::g_table_csv(*t.table()));
    const auto back = io::read_g_table_csv(path);
    CHECK(back.g(-2.0) == doctest::Approx(t.g(-2.0)));
    CHECK(back.gprime(-0.5) == doctest::Approx(t.gprime(-0.5)));
    write(path, "s,g\n0,1\n0,2\n");
    CHECK_THROWS_AS(io::read_g_table_csv(path), ParseError);
}

TEST_CASE("spec strings") {
    CHECK(io::parse_nonlinearity("const:2.5").g(0.0) == 2.5);
    CHECK(io::parse_nonlinearity("exp:0.5").g(1.0) == doctest::Approx(0.5 * std::exp(1.0)));
    CHECK(io::parse_nonlinearity("power:1:2").g(-3.0) == doctest::Approx(9.0));
    CHECK_THROWS_AS(io::parse_nonlinearity("const"), ParseError);
    CHECK_THROWS_AS(io::parse_nonlinearity("cosh:1"), ParseError);
    CHECK_THROWS_AS(io::parse_nonlinearity("exp:x"), ParseError);

    CHECK(io::parse_h("zero").H(0.5) == 0.0);
    CHECK(io::parse_h("h=const:2").H(0.5) == doctest::Approx(1.0));
    CHECK(io::parse_h("pow:1:1").H(0.5) == doctest::Approx(0.125));
    CHECK_THROWS_AS(io::parse_h("const:-1"), ParseError);
    CHECK_THROWS_AS(io::parse_h("zero:1"), ParseError);

    const auto hpath = scratch("h.csv");
    write(hpath, "r,h\n0.5,1\n1,3\n");
    CHECK(io::parse_h("table:" + hpath.string()).H(1.0) == doctest::Approx(0.5 + 1.0));
}

TEST_CASE("bump CSV") {
    const auto path = scratch("bumps.csv");
    write(path, "center,width\n0.3,0.1\n0.6,0.2\n");
    const auto b = io::read_bump_csv(path);
    REQUIRE(b.size() == 2);
    CHECK(b[1].center == 0.6);
    write(path, "center,width\n0.3,0\n");
    CHECK_THROWS_AS(io::read_bump_csv(path), ParseError);
}
