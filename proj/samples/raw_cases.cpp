// Writes a small simulated surgical dataset in the raw layout `fgam ingest`
// accepts: one row per case plus a long table of monitor samples.
//
//   raw_cases OUT_DIR [N_CASES]
//
// Then: fgam --config samples/raw_config.json ingest --out cache.json

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "fgam/data/schema.hpp"

namespace fs = std::filesystem;
using namespace fgam::data;

FeatureSchema raw_schema() {
  FeatureSchema s;
  s.weight_column = "weight_kg";
  FeatureSpec age{"age", Role::static_feature, Kind::numeric, {}, "years", false};
  FeatureSpec sex{"sex", Role::static_feature, Kind::categorical, {"F", "M"}, "", false};
  FeatureSpec asa{"asa", Role::static_feature, Kind::ordinal, {}, "", false};
  FeatureSpec pe{"phenylephrine", Role::time_varying, Kind::numeric, {}, "ug/kg", true};
  FeatureSpec fluid{"crystalloid", Role::time_varying, Kind::numeric, {}, "mL/kg", true};
  s.features = {age, sex, asa, pe, fluid};
  for (const auto& ch : default_channels()) {
    if (ch.name == "mean_arterial_pressure" || ch.name == "heart_rate" || ch.name == "tidal_volume" ||
        ch.name == "peak_inspiratory_pressure") {
      s.channels.push_back(ch);
    }
  }
  s.compliance = ComplianceSpec{};
  return s;
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: raw_cases OUT_DIR [N_CASES]\n";
    return 2;
  }
  const fs::path dir(argv[1]);
  const int n = argc > 2 ? std::stoi(argv[2]) : 1500;
  fs::create_directories(dir);
  std::ofstream(dir / "schema.json") << to_json(raw_schema()).dump(2) << '\n';

  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::ofstream cases(dir / "cases.csv"), series(dir / "series.csv");
  cases << "case_id,age,sex,asa,weight_kg,phenylephrine,crystalloid,duration_seconds,"
           "preop_creatinine,preop_creatinine_age_days,on_dialysis\n";
  series << "case_id,channel,t_seconds,value\n";
  for (int i = 0; i < n; ++i) {
    const std::string id = "case" + std::to_string(10000 + i);
    const double age = std::clamp(60 + 14 * z(rng), 18.0, 95.0);
    const int asa = std::clamp(static_cast<int>(std::round(2.4 + 0.02 * (age - 60) + 0.8 * z(rng))), 1, 5);
    const double weight = std::clamp(78 + 16 * z(rng), 40.0, 160.0);
    const double duration = 3600 * (1 + 5 * u(rng));
    const double sensitivity = 0.5 + asa * 0.3;

    // MAP drifts with occasional hypotensive stretches; HR responds.
    double map = 82 + 8 * z(rng), low_time = 0;
    for (double t = 0; t <= duration; t += 300) {
      if (u(rng) < 0.05) map -= 20 + 10 * u(rng);
      map += 0.3 * (82 - map) + 3 * z(rng);
      low_time += map < 65 ? 300 : 0;
      const double hr = 75 + 0.4 * (82 - map) + 6 * z(rng);
      series << id << ",mean_arterial_pressure," << t << ',' << map << '\n';
      series << id << ",heart_rate," << t << ',' << hr << '\n';
      if (static_cast<long>(t) % 1800 == 0) {
        const double tv = weight * (7.5 + 1.5 * z(rng)), pip = 18 + 4 * z(rng) + 0.05 * (weight - 78);
        series << id << ",tidal_volume," << t << ',' << tv << '\n';
        series << id << ",peak_inspiratory_pressure," << t << ',' << std::max(pip, 5.0) << '\n';
      }
    }
    const double pe_dose = weight * std::max(0.0, 2 * (low_time / 3600) + 0.5 * z(rng));
    const double fluid = weight * std::max(2.0, 8 + 3 * z(rng) + duration / 3600);

    const bool dialysis = u(rng) < 0.02;
    const bool has_preop = u(rng) < 0.93;
    const double preop = std::max(0.4, 0.9 + 0.25 * z(rng) + 0.004 * (age - 60));
    const double age_days = u(rng) < 0.9 ? std::floor(30 * u(rng)) : 31 + std::floor(60 * u(rng));
    const double risk = -4.2 + 0.03 * (age - 60) + sensitivity * 1.8 * (low_time / duration) + 0.4 * asa -
                        0.04 * (fluid / weight - 10);
    const bool injury = u(rng) < 1 / (1 + std::exp(-risk));
    cases << id << ',' << age << ',' << (u(rng) < 0.5 ? "F" : "M") << ',' << asa << ',' << weight << ',' << pe_dose
          << ',' << fluid << ',' << duration << ',' << (has_preop ? std::to_string(preop) : "") << ',' << age_days
          << ',' << (dialysis ? 1 : 0) << '\n';
    // Creatinine draws after surgery; timestamps are seconds from the end of surgery.
    const double rise = injury ? 0.35 + 0.4 * u(rng) : 0.12 * u(rng);
    for (double h : {6.0, 24.0, 44.0}) {
      if (u(rng) < 0.15) continue;
      series << id << ",postop_creatinine," << h * 3600 << ',' << preop * (1 + rise * h / 44.0) << '\n';
    }
  }
  std::cout << "wrote " << n << " cases to " << dir.string() << '\n';
}
