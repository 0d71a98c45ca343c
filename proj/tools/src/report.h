// Copyright 2026 The TermForge Authors.
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

#ifndef TERMFORGE_TOOLS_REPORT_H_
#define TERMFORGE_TOOLS_REPORT_H_

#include <string>

#include <nlohmann/json.hpp>

namespace termforge::tools {

// Renderings of a train report and eval results. Any input may be null.
std::string summary_table(const nlohmann::json& train_report,
                          const nlohmann::json& eval_results);
std::string metrics_csv(const nlohmann::json& train_report,
                        const nlohmann::json& eval_results);
// Per-stage epoch loss, each stage scaled to its own first epoch.
std::string loss_curves_svg(const nlohmann::json& train_report);

}  // namespace termforge::tools

#endif  // TERMFORGE_TOOLS_REPORT_H_
