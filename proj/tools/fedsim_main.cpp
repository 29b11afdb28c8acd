#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsim/harness.hpp"
#include "fedsim/simengine.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw fedsim::SimError(fedsim::ErrorCode::io_error, "cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_one(const fedsim::Scenario& scenario, std::uint64_t seed, const std::string& out_dir,
            bool trace) {
    fedsim::SimEngine engine(scenario, seed);

    std::ofstream event_log;
    std::ofstream bus_log;
    if (trace) {
        std::filesystem::create_directories(out_dir);
        event_log.open(out_dir + "/events.ndjson");
        bus_log.open(out_dir + "/bus_trace.ndjson");
        fedsim::EngineHooks hooks;
        hooks.on_event = [&](const fedsim::Event& ev) {
            json line{{"t", ev.time}, {"seq", ev.seq}, {"kind", fedsim::to_string(ev.kind)}};
            if (!ev.target.empty()) line["target"] = ev.target;
            event_log << line.dump() << "\n";
        };
        hooks.on_delivery = [&](const fedsim::Delivery& d) {
            json line{{"at", d.at},
                      {"receiver", d.receiver},
                      {"sender", d.msg.sender},
                      {"seq", d.msg.seq},
                      {"kind", fedsim::message_kind(d.msg.body)}};
            bus_log << line.dump() << "\n";
        };
        engine.set_hooks(std::move(hooks));
    }

    fedsim::MetricsReport report = engine.run();
    fedsim::write_report(report, out_dir);

    std::cout << "run complete: " << report.arrivals << " arrivals, " << report.completions
              << " completions, " << report.shortfall << " shortfall, "
              << report.sla_violation_count << " sla violations, cost "
              << fedsim::format_number(report.total_cost) << "\n";
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

json* resolve_path(json& root, const std::string& dotted) {
    json* node = &root;
    std::istringstream parts(dotted);
    std::string key;
    while (std::getline(parts, key, '.')) {
        if (node->is_array()) {
            node = &(*node)[std::stoul(key)];
        } else {
            node = &(*node)[key];
        }
    }
    return node;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedsim - federated cloud provisioning simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool trace = false;
    std::string sweep_param;
    std::vector<std::string> sweep_values;

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    validate_cmd->add_option("file", scenario_path, "scenario file")->required();

    CLI::App* run_cmd = app.add_subcommand("run", "run a scenario and write a report");
    run_cmd->add_option("file", scenario_path, "scenario file")->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--trace", trace, "dump event and bus traces");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario once per parameter value");
    sweep_cmd->add_option("file", scenario_path, "scenario file")->required();
    sweep_cmd->add_option("--param", sweep_param, "dotted path into the scenario document")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out", out_dir, "output directory");
    sweep_cmd->add_option("--seed", seed, "override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            fedsim::Scenario scenario = fedsim::load_scenario(scenario_path);
            auto violations = fedsim::validate(scenario);
            if (violations.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& v : violations) std::cout << "violation: " << v << "\n";
            return 1;
        }

        if (run_cmd->parsed()) {
            fedsim::Scenario scenario = fedsim::load_scenario(scenario_path);
            auto violations = fedsim::validate(scenario);
            if (!violations.empty()) {
                for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
                return 1;
            }
            return run_one(scenario, seed.value_or(scenario.seed), out_dir, trace);
        }

        if (sweep_cmd->parsed()) {
            json doc = json::parse(read_file(scenario_path));
            int rc = 0;
            for (const auto& value : sweep_values) {
                json patched = doc;
                json parsed_value;
                try {
                    parsed_value = json::parse(value);
                } catch (const json::exception&) {
                    parsed_value = value; // plain string value
                }
                *resolve_path(patched, sweep_param) = parsed_value;
                fedsim::Scenario scenario = fedsim::parse_scenario(patched.dump());
                auto violations = fedsim::validate(scenario);
                std::string run_dir = out_dir + "/" + sweep_param + "=" + value;
                if (!violations.empty()) {
                    for (const auto& v : violations) {
                        std::cerr << run_dir << " violation: " << v << "\n";
                    }
                    rc = 1;
                    continue;
                }
                std::cout << "[" << sweep_param << "=" << value << "] ";
                run_one(scenario, seed.value_or(scenario.seed), run_dir, trace);
            }
            return rc;
        }
    } catch (const fedsim::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
