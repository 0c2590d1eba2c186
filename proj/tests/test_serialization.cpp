/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The flsched Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "flsched/serialization.hpp"

using namespace flsched;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("flsched_test_" + name)).string();
}

const char* kTwoUe = R"({
  "radio": {"num_rbs": 4, "subcarrier_spacing_hz": 60000, "subcarriers_per_rb": 12,
            "noise_psd_w_per_hz": 3.981071705534973e-21, "bs_power_per_rb_w": 1.0,
            "ue_max_power_w": 0.2, "carrier_freq_hz": 3.5e9, "tti_s": 0.001},
  "fl_ues": [
    {"id": 0, "position": [10, 0], "channel_gain_sq": 4.65e-7,
     "workload": {"model_bits": 1e6, "epochs": 2, "cycles_per_sample": 1000, "samples": 500,
                  "f_max_hz": 2e9, "kappa": 1e-28, "energy_weight": 0.05}},
    {"id": 1, "position": [0, 30], "channel_gain_sq": 5.17e-8,
     "workload": {"model_bits": 1e6, "epochs": 2, "cycles_per_sample": 1000, "samples": 700,
                  "f_max_hz": 2e9, "kappa": 1e-28, "energy_weight": 0.05}}
  ],
  "hb_ues": [{"id": 2, "position": [-20, 5], "channel_gain_sq": 1.1e-7}],
  "hb_threshold": 1e6,
  "cell_radius_m": 50,
  "rng_seed": 0
})";

}  // namespace

TEST_CASE("scenario round-trips through a file")
{
    for (std::uint64_t seed : {1, 2, 99}) {
        const Scenario sc = generate(seed);
        const std::string path = temp_path("roundtrip.json");
        io::save_scenario(sc, path);
        const auto loaded = io::load_scenario(path);
        CHECK(loaded.scenario == sc);
        CHECK_FALSE(loaded.reordered);
        CHECK(loaded.warnings.empty());
        std::remove(path.c_str());
    }
}

TEST_CASE("hand-written two-UE file")
{
    const auto loaded = io::scenario_from_json(json::parse(kTwoUe));
    const Scenario& sc = loaded.scenario;
    CHECK(sc.num_fl() == 2);
    CHECK(sc.num_hb() == 1);
    CHECK(sc.radio.num_rbs == 4);
    CHECK(sc.hb_threshold_bps == 1e6);
    CHECK(sc.workload(1).samples == 700);
    CHECK(sc.hb_ues[0].kind == UeKind::Hb);
    CHECK_FALSE(loaded.reordered);
    CHECK_NOTHROW(sc.validate());
}

TEST_CASE("missing fields are named")
{
    auto expect_missing = [](json doc, const std::string& field) {
        try {
            io::scenario_from_json(doc);
            FAIL("no error for missing " << field);
        } catch (const ScenarioError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    json doc = json::parse(kTwoUe);
    doc.erase("hb_threshold");
    expect_missing(doc, "hb_threshold");

    doc = json::parse(kTwoUe);
    doc["radio"].erase("tti_s");
    expect_missing(doc, "radio.tti_s");

    doc = json::parse(kTwoUe);
    doc["fl_ues"][1]["workload"].erase("samples");
    expect_missing(doc, "fl_ues[1].workload.samples");
}

TEST_CASE("wrong types are rejected")
{
    json doc = json::parse(kTwoUe);
    doc["hb_threshold"] = "fast";
    CHECK_THROWS_AS(io::scenario_from_json(doc), ScenarioError);
    doc = json::parse(kTwoUe);
    doc["radio"]["num_rbs"] = 2.5;
    CHECK_THROWS_AS(io::scenario_from_json(doc), ScenarioError);
    doc = json::parse(kTwoUe);
    doc["fl_ues"] = json::array();
    CHECK_THROWS_AS(io::scenario_from_json(doc), ScenarioError);
}

TEST_CASE("unreadable files are I/O errors")
{
    CHECK_THROWS_AS(io::load_scenario(temp_path("does_not_exist.json")), std::runtime_error);
    const std::string path = temp_path("garbage.json");
    std::ofstream(path) << "{ not json";
    CHECK_THROWS(io::load_scenario(path));
    std::remove(path.c_str());
}

TEST_CASE("unsorted FL UEs are repaired with a warning")
{
    json doc = json::parse(kTwoUe);
    std::swap(doc["fl_ues"][0], doc["fl_ues"][1]);
    const auto loaded = io::scenario_from_json(doc);
    CHECK(loaded.reordered);
    CHECK(loaded.warnings.size() == 1);
    CHECK(loaded.scenario.is_channel_sorted());
    CHECK(loaded.scenario.fl_ues[0].id == 0);
}

TEST_CASE("result documents")
{
    const Scenario sc = generate(1, {{"num_fl", 2}, {"num_hb", 2}});
    const auto x = init_feasible(sc, Ordering{{1, 0}});
    const json js = io::to_json(x);
    CHECK(js.at("ordering").get<std::vector<int>>() == std::vector<int>{1, 0});
    CHECK(js.at("t_dl").size() == 2);
    CHECK(js.at("t_idle").get<double>() == x.t_idle);
    CHECK(js.at("k_hb_dl").size() == 2);

    const json jo = io::to_json(evaluate(x, sc));
    CHECK(jo.at("latency_s").get<double>() == doctest::Approx(x.latency()));

    const json ja = io::to_json(sim::replay_schedule(x, sc));
    CHECK(ja.contains("worst_slack"));
    CHECK(ja.at("violations").is_array());
}

TEST_CASE("CSV number format")
{
    CHECK(io::fmt(0.1) == "0.1");
    CHECK(io::fmt(212.578315123) == "212.578315");
    CHECK(io::fmt(1e8) == "100000000");
    CHECK(io::fmt(1.5e-12) == "1.5e-12");
    CHECK(io::fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");

    std::ostringstream os;
    io::write_trace_csv(os, {{0, 2.5, 2.0, 10.0, 0.0, 0}, {1, 2.25, 1.5, 15.0, 2.2, 31}});
    CHECK(os.str() == "iteration,objective,latency_s,energy_j\n0,2.5,2,10\n1,2.25,1.5,15\n");
}
