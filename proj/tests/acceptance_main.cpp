/*
 * Copyright (c) 2026 The cmclab Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--bandlimit L] [--only 1,3] [--expect-fail 4] [--json path]
//
// Exit status is 0 when the failing criteria are exactly the expected ones.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmclab/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cmclab acceptance criteria"};
  int band_limit = 32;
  std::vector<int> only, expect_fail;
  std::string json_path;
  app.add_option("--bandlimit,-L", band_limit, "band limit")->check(CLI::Range(4, 128));
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  app.add_option("--json", json_path, "write the detailed results here");
  CLI11_PARSE(app, argc, argv);

  cmclab::AcceptanceOptions opt;
  opt.band_limit = band_limit;
  opt.only = only;
  const auto results = cmclab::run_acceptance(opt, [](const cmclab::CriterionResult& r) {
    std::printf("%s\n", cmclab::format_result_line(r).c_str());
    std::fflush(stdout);
  });

  std::set<int> failed, expected;
  for (int id : expect_fail)
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : results) {
    if (!r.pass) failed.insert(r.id);
    doc.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail},
                   {"seconds", r.seconds}, {"data", r.data}});
  }
  if (!json_path.empty()) std::ofstream(json_path) << doc.dump(2) << "\n";

  int passed = static_cast<int>(results.size() - failed.size());
  std::printf("acceptance: %d/%zu criteria pass\n", passed, results.size());
  if (failed != expected) {
    std::printf("acceptance: failing set differs from the expected set\n");
    return 1;
  }
  if (!expected.empty()) std::printf("acceptance: failures match the documented expected set\n");
  return 0;
}
