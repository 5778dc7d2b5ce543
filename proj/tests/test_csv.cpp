#include <doctest.h>

#include <sstream>
#include <string>

#include "phishpanel/csv.hpp"
#include "phishpanel/errors.hpp"

using namespace phishpanel;

TEST_CASE("plain header and rows parse with line numbers") {
  std::istringstream in("a,b,c\n1,2,3\n4,5,6\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.header.size() == 3);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "2");
  CHECK(t.rows[1][2] == "6");
  CHECK(t.line_numbers[0] == 2);
  CHECK(t.line_numbers[1] == 3);
}

TEST_CASE("quoted fields keep commas and doubled quotes") {
  std::istringstream in("name,note\n\"Smith, Jane\",\"said \"\"hi\"\"\"\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "Smith, Jane");
  CHECK(t.rows[0][1] == "said \"hi\"");
}

TEST_CASE("leading comment lines are collected without the marker") {
  std::istringstream in("# produced by tool 0.1\n# config_hash=abc\na,b\n1,2\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.comments.size() == 2);
  CHECK(t.comments[1] == " config_hash=abc");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.header[0] == "a");
  CHECK(t.line_numbers[0] == 4);
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
  std::istringstream in("a,b\r\n\r\n1,2\r\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "1");
  CHECK(t.rows[0][1] == "2");
}

TEST_CASE("ragged rows raise with the offending line number") {
  std::istringstream in("a,b\n1,2\n3\n");
  try {
    read_csv(in);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(std::string(err.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("unterminated quote raises") {
  std::istringstream in("a,b\n\"open,2\n");
  CHECK_THROWS_AS(read_csv(in), ParseError);
}

TEST_CASE("input without a header row raises") {
  std::istringstream in("");
  CHECK_THROWS_AS(read_csv(in), ParseError);
  std::istringstream only_comments("# nothing else\n");
  CHECK_THROWS_AS(read_csv(only_comments), ParseError);
}

TEST_CASE("column lookup distinguishes missing from present") {
  std::istringstream in("alpha,beta\n1,2\n");
  CsvTable t = read_csv(in);
  CHECK(t.column("beta") == 1);
  CHECK(t.column("gamma") == -1);
  CHECK(t.require_column("alpha") == 0);
  CHECK_THROWS_AS(t.require_column("gamma"), ParseError);
}

TEST_CASE("escaping round-trips through a write and re-read") {
  std::ostringstream out;
  write_csv_row(out, {"plain", "with,comma", "with\"quote", ""});
  std::istringstream in("c1,c2,c3,c4\n" + out.str());
  CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "plain");
  CHECK(t.rows[0][1] == "with,comma");
  CHECK(t.rows[0][2] == "with\"quote");
  CHECK(t.rows[0][3] == "");
}
