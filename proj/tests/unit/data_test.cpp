/*
 * Copyright 2026 The HTE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "hte/data.hpp"
#include "hte/error.hpp"
#include "test_util.hpp"

namespace hte {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("hte_data_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadCsv, HeaderAndTargetByName) {
  TempDir dir;
  const auto p = dir.write("a.csv", "a,y,b\n1,10,2\n3,30,4\n5,50,6\n");
  const auto d = load_csv(p, {"y"}, true);
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.target_name, "y");
  EXPECT_EQ(d.x(2, 1), 6.0);
  EXPECT_EQ(d.y[1], 30.0);
}

TEST(LoadCsv, HeaderlessIndexTargetMatchesHandParse) {
  TempDir dir;
  const auto p = dir.write("b.csv", "0.5,-1e-3,7\n2.25,+4,8.5\r\n\n-0,1E2,9\n");
  const auto d = load_csv(p, {"0"}, false);
  ASSERT_EQ(d.size(), 3u);
  ASSERT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.y[0], 0.5);
  EXPECT_EQ(d.y[1], 2.25);
  EXPECT_EQ(d.y[2], 0.0);
  EXPECT_EQ(d.x(0, 0), -0.001);
  EXPECT_EQ(d.x(1, 0), 4.0);
  EXPECT_EQ(d.x(2, 0), 100.0);
  EXPECT_EQ(d.x(1, 1), 8.5);
  EXPECT_TRUE(d.feature_names.empty());
}

TEST(LoadCsv, DefaultTargetIsLastColumn) {
  TempDir dir;
  const auto p = dir.write("c.csv", "x1,x2,t\n1,2,3\n");
  const auto d = load_csv(p, {}, true);
  EXPECT_EQ(d.target_name, "t");
  EXPECT_EQ(d.y[0], 3.0);
}

TEST(LoadCsv, QuotedFieldsAndBom) {
  TempDir dir;
  const auto p = dir.write("q.csv", "\xEF\xBB\xBF\"x, one\",\"y\"\n\"1.5\",2\n");
  const auto d = load_csv(p, {"y"}, true);
  EXPECT_EQ(d.feature_names[0], "x, one");
  EXPECT_EQ(d.x(0, 0), 1.5);
}

TEST(LoadCsv, NanCellNamesLineAndColumn) {
  TempDir dir;
  const auto p = dir.write("n.csv", "a,b,y\n1,2,3\n4,NaN,6\n");
  const std::string msg = error_of([&] { load_csv(p, {"y"}, true); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("\"b\""), std::string::npos) << msg;
}

TEST(LoadCsv, Errors) {
  TempDir dir;
  EXPECT_THROW(load_csv(dir.write("e.csv", ""), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("h.csv", "a,y\n"), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("m.csv", "a,b\n1,2\n"), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("r.csv", "a,y\n1,2\n1\n"), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("t.csv", "a,y\nfoo,2\n"), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("i.csv", "a,y\ninf,2\n"), {"y"}, true), DataError);
  EXPECT_THROW(load_csv(dir.write("o.csv", "1,2\n"), {"5"}, false), DataError);
  EXPECT_THROW(load_csv(dir.path() / "missing.csv", {"y"}, true), DataError);
}

TEST(LoadCsv, WriteThenReadRoundTrip) {
  TempDir dir;
  const Dataset d = gen_counter3d(25, 3);
  write_csv(dir.path() / "rt.csv", d);
  const Dataset back = load_csv(dir.path() / "rt.csv", {"y"}, true);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.feature_names, d.feature_names);
}

TEST(Standardizer, ZeroMeanUnitStd) {
  Dataset d;
  d.x = testing::uniform_matrix(100, 3, 1, -4, 9);
  d.y = Vector::Zero(100);
  const auto s = fit_standardizer(d);
  const Matrix z = s.apply(d.x);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().sum() / 99.0;
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(var), 1.0, 1e-10);
  }
  EXPECT_LE((s.invert(z) - d.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardizer, ConstantColumnKeepsUnitScale) {
  Dataset d;
  d.x = testing::uniform_matrix(20, 2, 2);
  d.x.col(1).setConstant(4.0);
  d.y = Vector::Zero(20);
  const auto s = fit_standardizer(d);
  EXPECT_EQ(s.scale[1], 1.0);
  const Matrix z = s.apply(d.x);
  EXPECT_TRUE(z.col(1).isZero());
}

TEST(Standardizer, AlreadyStandardColumnUnchanged) {
  Dataset d;
  d.x.resize(4, 1);
  const double a = std::sqrt(3.0) / 2.0;  // values +-a, +-a have mean 0 and sample sd 1
  d.x << -a, a, -a, a;
  d.y = Vector::Zero(4);
  const auto s = fit_standardizer(d);
  EXPECT_LE((s.apply(d.x) - d.x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardizer, TargetScalingRoundTrip) {
  Dataset d = gen_sin16(50, 4);
  const auto s = fit_standardizer(d, true, true);
  const Vector t = s.apply_target(d.y);
  for (Eigen::Index i = 0; i < t.size(); ++i) EXPECT_NEAR(s.invert_target(t[i]), d.y[i], 1e-12);
  EXPECT_NEAR(t.mean(), 0.0, 1e-10);
}

TEST(DefaultScale, Examples) {
  Matrix x(8, 1);
  // mean 0, sample variance 1
  const double a = std::sqrt(7.0 / 8.0);
  x << a, -a, a, -a, a, -a, a, -a;
  const auto s = default_scale(x);
  EXPECT_NEAR(s.sigma, 1.0, 1e-14);
  EXPECT_NEAR(s.bin_width, 1.75, 1e-14);
  EXPECT_NEAR(s.scale, 1.0 / 1.75, 1e-14);
}

TEST(DefaultScale, SigmaIsRootMeanVariance) {
  Matrix x(2, 2);
  x << 0, 0, std::sqrt(2.0), std::sqrt(2.0);  // per-column sample variances 1, 1
  EXPECT_NEAR(default_scale(x).sigma, 1.0, 1e-15);
}

TEST(DefaultScale, ScaleEquivariant) {
  const Matrix x = testing::uniform_matrix(60, 3, 5);
  const double h = default_scale(x).bin_width;
  EXPECT_NEAR(default_scale(Matrix(x * 7.5)).bin_width, 7.5 * h, 1e-12 * h);
}

TEST(DefaultScale, Errors) {
  EXPECT_THROW(default_scale(Matrix::Ones(1, 2)), DataError);
  EXPECT_THROW(default_scale(Matrix::Ones(5, 2)), DataError);
}

TEST(Generators, TruthValues) {
  EXPECT_EQ(sin16_truth(0.0), 0.0);
  EXPECT_NEAR(counter3d_truth(testing::pt({1, 1, 1})), 30.0 * std::sin(-1.0), 1e-12);
  EXPECT_NEAR(counter3d_truth(testing::pt({1, 1, 1})), -25.2441, 1e-4);
}

TEST(Generators, DeterministicAndInRange) {
  for (const std::string name : {"sin16", "counter3d", "friedman9"}) {
    const auto a = generate(name, 300, 9);
    const auto b = generate(name, 300, 9);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    EXPECT_GE(a.x.minCoeff(), 0.0);
    EXPECT_LT(a.x.maxCoeff(), 1.0);
    EXPECT_NE(generate(name, 300, 10).y, a.y);
  }
  EXPECT_THROW(generate("nope", 3, 0), ConfigError);
}

TEST(Generators, NoiseHasStdPointOne) {
  const auto d = gen_sin16(20000, 1);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const double e = d.y[i] - sin16_truth(d.x(i, 0));
    ss += e * e;
  }
  EXPECT_NEAR(std::sqrt(ss / 20000.0), 0.1, 0.003);
}

TEST(Split, SizesAndPartition) {
  for (std::size_t n : {2, 3, 10, 17, 100, 1001}) {
    for (double f : {0.1, 0.5, 0.7, 0.9}) {
      Dataset d;
      d.x.resize(static_cast<Eigen::Index>(n), 1);
      d.y.resize(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) d.x(i, 0) = d.y[i] = static_cast<double>(i);
      const std::size_t want = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
      if (want == 0 || want >= n) {
        EXPECT_THROW(split(d, f, 3), DataError);
        continue;
      }
      const auto s = split(d, f, 3);
      EXPECT_EQ(s.train.size(), want);
      std::vector<double> all;
      for (Eigen::Index i = 0; i < s.train.y.size(); ++i) all.push_back(s.train.y[i]);
      for (Eigen::Index i = 0; i < s.test.y.size(); ++i) all.push_back(s.test.y[i]);
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(all[i], static_cast<double>(i));
    }
  }
}

TEST(Split, SevenThreeAndDeterministic) {
  const auto d = gen_sin16(10, 1);
  const auto a = split(d, 0.7, 5);
  const auto b = split(d, 0.7, 5);
  EXPECT_EQ(a.train.size(), 7u);
  EXPECT_EQ(a.test.size(), 3u);
  EXPECT_EQ(a.train.x, b.train.x);
  EXPECT_THROW(split(d, 1.0, 5), ConfigError);
  EXPECT_THROW(split(d, 0.0, 5), ConfigError);
}

TEST(Dataset, ValidateRejectsNonFinite) {
  Dataset d = gen_sin16(5, 1);
  validate(d);
  d.y[2] = std::nan("");
  EXPECT_THROW(validate(d), DataError);
}

}  // namespace
}  // namespace hte
