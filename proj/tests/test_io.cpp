#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace blfix_test;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("blfix_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

using Io = TempDir;

}  // namespace

TEST_F(Io, DatumRoundTripIsExact) {
  Rng rng(1);
  for (const BLDatum& datum : {gen_young(), gen_holder(3, 2), gen_random(7, 3, 5, 12)}) {
    const fs::path p = dir_ / "d.json";
    save_datum(datum, p);
    EXPECT_EQ(load_datum(p), datum);
  }
}

TEST_F(Io, MatrixRoundTripIsExact) {
  Rng rng(2);
  const SpdMatrix x = random_spd(rng, 4);
  const fs::path p = dir_ / "x.json";
  save_matrix(x.matrix(), p);
  EXPECT_EQ(load_spd_matrix(p).matrix(), x.matrix());
}

TEST_F(Io, WrongRowCountIsShapeMismatch) {
  const fs::path p = write("bad.json", R"({"d": 2, "dprime": 1, "m": 1, "weights": [1.0],
    "maps": [[[1, 0], [0, 1]]]})");
  EXPECT_THROW(load_datum(p), ShapeMismatch);
}

TEST_F(Io, WrongWeightCountIsShapeMismatch) {
  const fs::path p = write("bad.json", R"({"d": 2, "dprime": 2, "m": 1, "weights": [1.0, 1.0],
    "maps": [[[1, 0], [0, 1]]]})");
  EXPECT_THROW(load_datum(p), ShapeMismatch);
}

TEST_F(Io, ZeroWeightLoadsButFailsValidation) {
  const fs::path p = write("w0.json", R"({"d": 2, "dprime": 1, "m": 3, "weights": [0, 1, 1],
    "maps": [[[1, 0]], [[0, 1]], [[1, -1]]]})");
  const BLDatum datum = load_datum(p);
  EXPECT_FALSE(validate(datum).weight_range_ok);
}

TEST_F(Io, ParseErrorsCarryContext) {
  const fs::path p = write("syntax.json", "{\n  \"d\": 2,\n  \"dprime\": ]\n}");
  try {
    load_datum(p);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("syntax.json:3"), std::string::npos) << e.what();
  }
  const fs::path q = write("missing.json", R"({"d": 2, "dprime": 1, "m": 1, "maps": [[[1, 0]]]})");
  try {
    load_datum(q);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("weights"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_datum(dir_ / "absent.json"), ParseError);
}

TEST_F(Io, RejectsNonNumbers) {
  const fs::path p = write("nan.json", R"({"d": 1, "dprime": 1, "m": 1, "weights": ["x"],
    "maps": [[[1]]]})");
  EXPECT_THROW(load_datum(p), ParseError);
}

TEST_F(Io, MatrixSymmetryTolerance) {
  const fs::path ok = write("ok.json", R"({"n": 2, "data": [[2, 1], [1.000000001, 2]]})");
  const SymMatrix s = load_matrix(ok);
  EXPECT_EQ(s(0, 1), s(1, 0));
  const fs::path bad = write("bad.json", R"({"n": 2, "data": [[2, 1], [1.1, 2]]})");
  EXPECT_THROW(load_matrix(bad), ParseError);
  const fs::path indefinite = write("ind.json", R"({"n": 2, "data": [[1, 2], [2, 1]]})");
  EXPECT_THROW(load_spd_matrix(indefinite), CholeskyFailure);
}

TEST_F(Io, AtomicWriteLeavesNoTemporary) {
  const fs::path p = dir_ / "out.txt";
  write_file_atomic(p, "hello");
  EXPECT_TRUE(fs::exists(p));
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
  EXPECT_THROW(write_file_atomic(dir_ / "no_such_dir" / "x.txt", "x"), ParseError);
  EXPECT_FALSE(fs::exists(dir_ / "no_such_dir"));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(std::log(2.0)), "0.6931471805599453");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
