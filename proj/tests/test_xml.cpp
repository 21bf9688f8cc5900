#include "tla/xml.hpp"

#include <doctest.h>

#include <string>

using namespace tla::xml;

TEST_CASE("elements, text and attributes") {
  const Element root = parse("<?xml version=\"1.0\"?>\n<a x=\"1\" y='two'>\n  hi <b>there</b>\n</a>");
  CHECK(root.name == "a");
  REQUIRE(root.attributes.size() == 2);
  CHECK(root.attributes[1].first == "y");
  CHECK(root.attributes[1].second == "two");
  REQUIRE(root.children.size() == 1);
  CHECK(root.children[0].text == "there");
  CHECK(root.children[0].line == 3);
}

TEST_CASE("entities, CDATA, comments") {
  const Element e = parse("<a>&lt;&amp;&gt;&quot;&apos;&#65;&#x42;<![CDATA[<raw>]]><!-- c --></a>");
  CHECK(e.text == "<&>\"'AB<raw>");
  CHECK(parse("\xef\xbb\xbf<a/>").name == "a");
}

TEST_CASE("escape round trip") {
  const std::string s = "a < b & \"c\" > 'd'";
  CHECK(parse("<x>" + escape(s) + "</x>").text == s);
}

TEST_CASE("malformed input reports a position") {
  try {
    parse("<a>\n<b>\n</a>");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 1);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("<a>"), ParseError);
  CHECK_THROWS_AS(parse("<a></a><b/>"), ParseError);
  CHECK_THROWS_AS(parse("<a x='1' x='2'/>"), ParseError);
  CHECK_THROWS_AS(parse("<a>&nope;</a>"), ParseError);
  CHECK_THROWS_AS(parse("<!DOCTYPE a><a/>"), ParseError);
  CHECK_THROWS_AS(parse("<a>&#0;</a>"), ParseError);
}

TEST_CASE("nesting depth is bounded") {
  std::string deep;
  for (int i = 0; i < 1000; ++i) deep += "<a>";
  CHECK_THROWS_AS(parse(deep), ParseError);
}
