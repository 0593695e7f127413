#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include "resonet/config.hpp"
#include "resonet/signal_io.hpp"

using namespace resonet;

TEST_CASE("parse basics: comments, blanks, dotted keys, trimming") {
    KeyValues kv = KeyValues::parse_string(
        "# header comment\n"
        "\n"
        "a = 1\n"
        "  bank.decay =   0.999  \n"
        "name = chirp run\n",
        "test.cfg");
    CHECK(kv.has("a"));
    CHECK(kv.get_int("a", 0) == 1);
    CHECK(kv.get_double("bank.decay", 0) == 0.999);
    CHECK(kv.get_string("name", "") == "chirp run");
}

TEST_CASE("malformed lines carry origin and line number") {
    CHECK_THROWS_WITH_AS(KeyValues::parse_string("a = 1\nnot a pair\n", "f.cfg"),
                         doctest::Contains("f.cfg:2"), IoError);
    CHECK_THROWS_WITH_AS(KeyValues::parse_string("= 3\n", "f.cfg"),
                         doctest::Contains("f.cfg:1"), IoError);
    CHECK_THROWS_WITH_AS(KeyValues::parse_string("a = 1\na = 2\n", "f.cfg"),
                         doctest::Contains("duplicate key 'a'"), IoError);
}

TEST_CASE("typed getters parse strictly") {
    KeyValues kv = KeyValues::parse_string("x = 12.5\nn = 42\nb = true\nbad = 1.5x\n");
    CHECK(kv.get_double("x", 0) == 12.5);
    CHECK(kv.get_int("n", 0) == 42);
    CHECK(kv.get_bool("b", false));
    CHECK_THROWS_AS(kv.get_double("bad", 0), std::invalid_argument);
    CHECK_THROWS_AS(kv.get_int("x", 0), std::invalid_argument);

    KeyValues kb = KeyValues::parse_string("flag = yes\n");
    CHECK_THROWS_AS(kb.get_bool("flag", false), std::invalid_argument);
}

TEST_CASE("defaults are recorded so serialize shows the resolved config") {
    KeyValues kv = KeyValues::parse_string("given = 2\n");
    CHECK(kv.get_int("given", 0) == 2);
    CHECK(kv.get_double("missing.d", 2.5) == 2.5);
    CHECK(kv.get_string("missing.s", "fallback") == "fallback");
    std::string s = kv.serialize();
    CHECK(s.find("missing.d = 2.5\n") != std::string::npos);
    CHECK(s.find("missing.s = fallback\n") != std::string::npos);
    CHECK(s.find("given = 2\n") != std::string::npos);
}

TEST_CASE("serialize is sorted and round-trips") {
    KeyValues kv;
    kv.set("zeta", "1");
    kv.set_double("alpha", 0.1);
    kv.set_int("mid", 7);
    kv.set_bool("flag", true);
    std::string s = kv.serialize();
    CHECK(s.find("alpha") < s.find("flag"));
    CHECK(s.find("flag") < s.find("mid"));
    CHECK(s.find("mid") < s.find("zeta"));

    KeyValues back = KeyValues::parse_string(s);
    CHECK(back.get_double("alpha", 0) == 0.1);
    CHECK(back.get_bool("flag", false));
    CHECK(back.get_int("mid", 0) == 7);
    CHECK(back.get_string("zeta", "") == "1");
    CHECK(back.serialize() == s);
}

TEST_CASE("require_string and unconsumed-key detection") {
    KeyValues kv = KeyValues::parse_string("used = 1\ntypo.key = 5\n", "run.cfg");
    CHECK(kv.require_string("used") == "1");
    CHECK_THROWS_WITH_AS(kv.require_string("absent"), doctest::Contains("absent"),
                         std::invalid_argument);
    auto stray = kv.unconsumed();
    REQUIRE(stray.size() == 1);
    CHECK(*stray.begin() == "typo.key");
    CHECK_THROWS_WITH_AS(kv.fail_on_unconsumed(), doctest::Contains("typo.key"),
                         std::invalid_argument);
    CHECK(kv.get_int("typo.key", 0) == 5);
    CHECK_NOTHROW(kv.fail_on_unconsumed());
}

TEST_CASE("parse_file errors on missing path, reads real files") {
    CHECK_THROWS_AS(KeyValues::parse_file("/nonexistent/nope.cfg"), IoError);

    std::filesystem::path p = std::filesystem::temp_directory_path() / "resonet_cfg_test.cfg";
    write_text_file(p.string(), "k = v\n");
    KeyValues kv = KeyValues::parse_file(p.string());
    CHECK(kv.get_string("k", "") == "v");
    std::filesystem::remove(p);
}
