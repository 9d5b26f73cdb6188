// Copyright 2026 The EESPNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "eesp/verify.hpp"

namespace eesp {
namespace {

class Suites : public ::testing::TestWithParam<std::string> {};

TEST_P(Suites, AllChecksPass) {
  const auto results = verify::run(GetParam(), 1);
  ASSERT_EQ(results.size(), 1u);
  for (const auto& c : results[0].checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

INSTANTIATE_TEST_SUITE_P(Verify, Suites, ::testing::ValuesIn(verify::suite_names()),
                         [](const auto& info) {
                           std::string s = info.param;
                           for (auto& ch : s) {
                             if (ch == '-') ch = '_';
                           }
                           return s;
                         });

TEST(Verify, UnknownSelector) {
  EXPECT_THROW(verify::run("bogus"), std::invalid_argument);
  EXPECT_EQ(verify::run("all").size(), verify::suite_names().size());
}

TEST(Verify, SweepCoversSpace) {
  const auto st = verify::conv_oracle_sweep(100, 3);
  EXPECT_EQ(st.cases, 100u);
  EXPECT_LE(st.max_abs_diff, 1e-12);
  EXPECT_TRUE(st.macs_match);
  EXPECT_EQ(st.kinds.size(), 5u);
}

}  // namespace
}  // namespace eesp
