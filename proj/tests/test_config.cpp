#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <apfem/config.hpp>
#include <apfem/types.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace apfem;

namespace {

ConfigMap parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("key = value lines with comments and blanks") {
  const auto c = parse("# study setup\n\nscheme = ap, imex\n  eps=1e-2   # trailing\ncfl_hat = 0.5\r\nnx =\n");
  CHECK(c.size() == 4);
  CHECK(c.at("scheme") == "ap, imex");
  CHECK(c.at("eps") == "1e-2");
  CHECK(c.at("cfl_hat") == "0.5");
  CHECK(c.at("nx").empty());
  CHECK(parse("").empty());
  CHECK(parse("   # nothing\n").empty());
}

TEST_CASE("malformed entries name the line") {
  CHECK(error_of("eps = 1\nnonsense\n").find("test.cfg:2") != std::string::npos);
  CHECK(error_of("= 4\n").find("empty key") != std::string::npos);
  CHECK(error_of("cfl-hat = 0.5\n").find("underscores") != std::string::npos);
  const std::string dup = error_of("eps = 1\n# again\neps = 2\n");
  CHECK(dup.find("test.cfg:3") != std::string::npos);
  CHECK(dup.find("duplicate key eps") != std::string::npos);
}

TEST_CASE("config_to_args turns keys into dashed flags") {
  const auto args = config_to_args(parse("t_final = 0.2\ncfl_hat = 0.5\nscheme = imex\n"));
  REQUIRE(args.size() == 3);
  CHECK(args[0] == "--cfl-hat=0.5");
  CHECK(args[1] == "--scheme=imex");
  CHECK(args[2] == "--t-final=0.2");
}

TEST_CASE("load_config reads files and reports missing ones") {
  const auto path = std::filesystem::temp_directory_path() / "apfem_test_config.cfg";
  {
    std::ofstream out(path);
    out << "suite = splitting\n";
  }
  CHECK(load_config(path).at("suite") == "splitting");
  CHECK_THROWS_AS(load_config(path.string() + ".missing"), InvalidArgument);
  std::filesystem::remove(path);
}

TEST_CASE("split_list trims and drops empty items") {
  CHECK(split_list("ap,imex") == std::vector<std::string>{"ap", "imex"});
  CHECK(split_list(" 1e-2 , 1e-4,, ") == std::vector<std::string>{"1e-2", "1e-4"});
  CHECK(split_list("").empty());
  CHECK(split_list("64;128", ';') == std::vector<std::string>{"64", "128"});
}
