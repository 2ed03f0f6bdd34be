#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fademac/table.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace fademac;

TEST_CASE("empty table writes only the header")
{
    Table t;
    t.columns = {"a", "b"};
    CHECK(to_csv_string(t) == "a,b\n");
}

TEST_CASE("column order is schema order")
{
    Table t;
    t.columns = {"z", "a", "m"};
    t.add_row({1.0, std::int64_t{2}, std::string("x")});
    CHECK(to_csv_string(t) == "z,a,m\n1,2,x\n");
    CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("quoting")
{
    Table t;
    t.columns = {"text"};
    t.add_row({std::string("a,b \"c\"")});
    CHECK(to_csv_string(t) == "text\n\"a,b \"\"c\"\"\"\n");
    const auto rows = parse_csv(to_csv_string(t));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "a,b \"c\"");
}

TEST_CASE("floats round-trip exactly")
{
    const double values[] = {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.66143400443865264832,
                             std::numeric_limits<double>::denorm_min(), 123456789.0};
    Table t;
    t.columns = {"v"};
    for (double v : values)
    {
        t.add_row({v});
    }
    const auto rows = parse_csv(to_csv_string(t));
    for (std::size_t i = 0; i < std::size(values); ++i)
    {
        double back = 0.0;
        const auto& s = rows[i + 1][0];
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == values[i]);
    }
}

TEST_CASE("emit_csv writes LF files and reports the path on failure")
{
    const auto dir = std::filesystem::temp_directory_path() / "fademac_table_test";
    std::filesystem::create_directories(dir);
    Table t;
    t.columns = {"a"};
    t.add_row({1.5});
    emit_csv(t, dir / "t.csv");
    std::ifstream in(dir / "t.csv", std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "a\n1.5\n");
    try
    {
        emit_csv(t, dir / "missing" / "t.csv");
        FAIL("expected an error");
    }
    catch (const std::runtime_error& e)
    {
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("lookups")
{
    Table t;
    t.columns = {"x", "y"};
    t.add_row({1.0, 2.0});
    CHECK(t.column("y") == 1);
    CHECK(t.number(0, "y") == 2.0);
    CHECK_THROWS_AS(t.column("q"), std::out_of_range);
}
