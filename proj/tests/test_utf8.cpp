#include "doctest.h"

#include "biokg/utf8.hpp"

using namespace biokg;

TEST_CASE("u8 round trip") {
    const std::string text = "曾国藩 Zeng Guofan，字伯涵。";
    CHECK(u8_encode(u8_decode(text)) == text);
    CHECK(u8_length("曾国藩") == 3);
    CHECK(u8_length("abc") == 3);
    CHECK(u8_length("") == 0);
}

TEST_CASE("invalid bytes decode to replacement") {
    const std::string bad = "a\xC3(";  // truncated 2-byte sequence
    const auto cps = u8_decode(bad);
    REQUIRE(cps.size() == 3);
    CHECK(cps[0] == U'a');
    CHECK(cps[1] == 0xFFFD);
    CHECK(cps[2] == U'(');
}

TEST_CASE("trim handles cjk whitespace") {
    CHECK(trim("  曾国藩　") == "曾国藩");
    CHECK(trim(" \t\n ") == "");
    CHECK(trim("x") == "x");
    CHECK(is_blank("　 \t"));
    CHECK(!is_blank(" x "));
}
