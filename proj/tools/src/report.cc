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

#include "report.h"

#include <algorithm>
#include <cstdio>
#include <string_view>
#include <vector>

namespace termforge::tools {
namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct Row {
  std::string group;
  std::string metric;
  double value;
};

std::vector<Row> collect(const json& train, const json& eval) {
  std::vector<Row> rows;
  if (train.is_object()) {
    for (const auto& s : train.value("stages", json::array())) {
      const auto& loss = s.at("epoch_loss");
      if (loss.empty()) continue;
      const std::string g = "train/" + s.at("stage").get<std::string>();
      rows.push_back({g, "first_epoch_loss", loss.front().get<double>()});
      rows.push_back({g, "last_epoch_loss", loss.back().get<double>()});
    }
    for (const char* key : {"margin_before_sen", "margin_after_sen"}) {
      if (train.contains(key) && train.at(key).is_number()) {
        rows.push_back({"train/sen", key, train.at(key).get<double>()});
      }
    }
  }
  if (eval.is_object()) {
    for (const char* kind : {"sen", "tok"}) {
      const json* q = nullptr;
      if (eval.contains("qca") && eval["qca"].contains(kind)) q = &eval["qca"][kind];
      if (q == nullptr || q->is_null()) continue;
      for (const auto& [name, v] : q->at("aggregates").items()) {
        rows.push_back({std::string("qca/") + kind, name, v.get<double>()});
      }
    }
    if (eval.contains("qa") && !eval["qa"].is_null()) {
      for (const auto& [name, v] : eval["qa"].at("aggregates").items()) {
        rows.push_back({"qa", name, v.get<double>()});
      }
    }
  }
  return rows;
}

}  // namespace

std::string summary_table(const json& train, const json& eval) {
  const std::vector<Row> rows = collect(train, eval);
  std::size_t gw = 5, mw = 6;
  for (const Row& r : rows) {
    gw = std::max(gw, r.group.size());
    mw = std::max(mw, r.metric.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::string out = pad("group", gw) + "  " + pad("metric", mw) + "  value\n";
  out += std::string(gw, '-') + "  " + std::string(mw, '-') + "  ----------\n";
  for (const Row& r : rows) {
    out += pad(r.group, gw) + "  " + pad(r.metric, mw) + "  " + fixed(r.value) + "\n";
  }
  return out;
}

std::string metrics_csv(const json& train, const json& eval) {
  std::string out = "group,metric,value\n";
  for (const Row& r : collect(train, eval)) {
    out += r.group + "," + r.metric + "," + fixed(r.value, 10) + "\n";
  }
  return out;
}

std::string loss_curves_svg(const json& train) {
  constexpr double kW = 640, kH = 360, kPad = 48;
  static constexpr std::string_view kColors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
      "viewBox=\"0 0 640 360\">\n"
      "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  out += "<line x1=\"48\" y1=\"312\" x2=\"592\" y2=\"312\" stroke=\"black\"/>\n";
  out += "<line x1=\"48\" y1=\"48\" x2=\"48\" y2=\"312\" stroke=\"black\"/>\n";
  out += "<text x=\"320\" y=\"344\" text-anchor=\"middle\" font-size=\"12\">"
         "epoch (fraction of stage)</text>\n";
  out += "<text x=\"16\" y=\"180\" font-size=\"12\" transform=\"rotate(-90 16 180)\" "
         "text-anchor=\"middle\">loss / first-epoch loss</text>\n";
  const json stages = train.is_object() ? train.value("stages", json::array())
                                        : json::array();
  // Shared y range over the scaled curves.
  double ymax = 1.0;
  for (const auto& s : stages) {
    const auto& loss = s.at("epoch_loss");
    if (loss.empty() || loss.front().get<double>() == 0.0) continue;
    for (const auto& v : loss) {
      ymax = std::max(ymax, v.get<double>() / loss.front().get<double>());
    }
  }
  std::size_t k = 0;
  for (const auto& s : stages) {
    const auto& loss = s.at("epoch_loss");
    const std::string name = s.at("stage").get<std::string>();
    const std::string_view color = kColors[k % std::size(kColors)];
    if (!loss.empty() && loss.front().get<double>() != 0.0) {
      const double first = loss.front().get<double>();
      std::string points;
      for (std::size_t e = 0; e < loss.size(); ++e) {
        const double fx =
            loss.size() == 1 ? 0.0 : static_cast<double>(e) / (loss.size() - 1);
        const double x = kPad + fx * (kW - 2 * kPad);
        const double y = kH - kPad - (loss[e].get<double>() / first) / ymax * (kH - 2 * kPad);
        points += fixed(x, 1) + "," + fixed(y, 1) + " ";
      }
      out += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" +
             std::string(color) + "\" points=\"" + points + "\"/>\n";
    }
    out += "<text x=\"" + fixed(kW - kPad - 60, 0) + "\" y=\"" +
           fixed(kPad + 16.0 * static_cast<double>(k), 0) +
           "\" font-size=\"12\" fill=\"" + std::string(color) + "\">" + name +
           "</text>\n";
    ++k;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace termforge::tools
