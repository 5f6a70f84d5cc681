#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include "procnav/bridge_server.hpp"
#include "procnav/harness.hpp"
#include "procnav/lang.hpp"
#include "procnav/planner.hpp"
#include "procnav/procgen.hpp"
#include "procnav/serialization.hpp"
#include "procnav/sim_node.hpp"

using namespace procnav;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

Json load_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

// "--a.b=1" or "--a.b 1" pairs left over after CLI11 parsing.
void apply_overrides(Json& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) throw ConfigError("unexpected argument '" + arg + "'");
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("override '" + arg + "' needs a value");
      value = extras[++i];
    }
    apply_override(config, key, value);
  }
}

int report_exit(const ExitReport& r) {
  const int code = static_cast<int>(r.code);
  std::cerr << "exit " << code << ": " << r.message << "\n";
  for (const auto& [k, v] : r.metrics) std::cout << k << '=' << v << '\n';
  return code;
}

WorldState load_world(const std::string& path) {
  const Json j = load_json(path);
  // Accept either a serialized world or a spec (generated on the fly).
  if (j.contains("layout")) return world_from_json(j);
  return generate_environment(spec_from_json(j));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procnav: procedural navigation simulator"};
  app.require_subcommand(1);

  // run ---------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a scenario file; --dotted.key value overrides any config key");
  std::string run_config;
  run->add_option("config", run_config, "Scenario JSON file")->required();
  run->allow_extras();

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a world from an environment spec");
  std::string gen_spec, gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("spec", gen_spec, "EnvironmentSpec JSON file")->required();
  gen->add_option("--seed", gen_seed, "Override the spec seed");
  gen->add_option("--out", gen_out, "Output world file (stdout when omitted)");

  // pentagon ----------------------------------------------------------------
  auto* pent = app.add_subcommand("pentagon", "Pentagon reference and path-error report");
  double side = 1.0, speed = 0.5, dt = 0.05, offset = 0.0;
  std::string pent_out;
  pent->add_option("--side", side, "Side length [m]")->check(CLI::PositiveNumber);
  pent->add_option("--v", speed, "Speed [m/s]")->check(CLI::PositiveNumber);
  pent->add_option("--dt", dt, "Sample period [s]")->check(CLI::PositiveNumber);
  pent->add_option("--offset", offset, "Also compare against a parallel copy shifted outward by this many meters");
  pent->add_option("--out", pent_out, "Write samples as 't x y theta' lines");

  // describe ----------------------------------------------------------------
  auto* desc = app.add_subcommand("describe", "Print the environment description of a world or spec file");
  std::string desc_file;
  desc->add_option("world", desc_file, "World or spec JSON file")->required();

  // plan --------------------------------------------------------------------
  auto* plan = app.add_subcommand("plan", "Plan a natural-language command against a world");
  bool use_stub = false, use_llm = false;
  std::string command, plan_world;
  LlmEndpointConfig llm;
  auto* stub_flag = plan->add_flag("--stub", use_stub, "Rule-based planner");
  plan->add_flag("--llm", use_llm, "Chat-completion endpoint")->excludes(stub_flag);
  plan->add_option("command", command, "Command text")->required();
  plan->add_option("world", plan_world, "World or spec JSON file")->required();
  plan->add_option("--url", llm.url, "Endpoint URL");
  plan->add_option("--model", llm.model, "Model id");
  plan->add_option("--token-env", llm.token_env, "Environment variable holding the API token");
  plan->add_option("--timeout", llm.timeout_s, "Request timeout [s]");

  // serve -------------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Run a scenario live on the bridge until interrupted");
  std::string serve_config, bind = "127.0.0.1", static_dir;
  int port = 9090;
  double realtime = 1.0;
  serve->add_option("config", serve_config, "Scenario JSON file")->required();
  serve->add_option("--port", port, "TCP port (WebSocket and line-delimited JSON)");
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--static", static_dir, "Directory served over plain HTTP");
  serve->add_option("--realtime", realtime, "Speed factor; 0 runs unpaced");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Json j = load_json(run_config);
      apply_overrides(j, run->remaining());
      return report_exit(run_scenario(scenario_from_json(j)));
    }

    if (*gen) {
      EnvironmentSpec spec = spec_from_json(load_json(gen_spec));
      if (gen_seed) spec.seed = *gen_seed;
      const std::string out = to_json(generate_environment(spec)).dump(1) + "\n";
      if (gen_out.empty()) {
        std::cout << out;
      } else {
        write_file(gen_out, out);
      }
      return 0;
    }

    if (*pent) {
      const auto ref = generate_pentagon_reference(side, speed, dt);
      double length = 0.0;
      for (std::size_t i = 1; i < ref.size(); ++i)
        length += distance({ref[i - 1].pose.x, ref[i - 1].pose.y}, {ref[i].pose.x, ref[i].pose.y});
      std::cout << "samples=" << ref.size() << "\nlength=" << length << "\nclosure="
                << std::hypot(ref.back().pose.x - ref.front().pose.x, ref.back().pose.y - ref.front().pose.y) << "\n";
      if (offset != 0.0) {
        const auto m = compute_path_error(ref, offset_polyline(ref, -offset));
        std::cout << "rmse=" << m.rmse << "\nmax_dev=" << m.max_dev << "\nendpoint=" << m.endpoint
                  << "\nsymmetric_rmse=" << m.symmetric_rmse << "\nsymmetric_max_dev=" << m.symmetric_max_dev << "\n";
      }
      if (!pent_out.empty()) {
        std::ostringstream os;
        os.precision(12);
        for (const auto& s : ref) os << s.t << ' ' << s.pose.x << ' ' << s.pose.y << ' ' << s.pose.theta << '\n';
        write_file(pent_out, os.str());
      }
      return 0;
    }

    if (*desc) {
      std::cout << render_environment_description(load_world(desc_file)) << "\n";
      return 0;
    }

    if (*plan) {
      const WorldState world = load_world(plan_world);
      PlannerResponse r;
      if (use_llm) {
        HttpTransport transport;
        r = llm_plan({render_environment_description(world), command}, world, llm, transport);
      } else {
        r = stub_plan(world, parse_command(command));
      }
      std::cout << to_json(r).dump(2) << "\n";
      return 0;
    }

    if (*serve) {
      Json j = load_json(serve_config);
      apply_overrides(j, serve->remaining());
      ScenarioConfig config = scenario_from_json(j);
      WorldState world = generate_environment(config.environment, config.generation);
      Simulation sim(world, config.executor);
      for (std::size_t i = 0; i < config.agents.size() && i < world.agents.size(); ++i) {
        const auto& a = config.agents[i];
        if (a.mode == "oscillator") sim.set_oscillator(static_cast<int>(i), a.oscillator);
        if (a.mode == "plan" && !a.plan.empty()) sim.start_plan(static_cast<int>(i), parse_plan(a.plan));
      }
      Broker broker;
      SimNodeConfig nc;
      nc.generation = config.generation;
      nc.lidar = config.lidar;
      nc.odometry_noise = config.odometry;
      nc.noise_seed = config.odometry_seed;
      nc.scan_every = config.scan_every;
      nc.planner = config.planner;
      nc.llm = config.llm;
      SimNode node(broker, std::move(sim), config.environment, nc);
      BridgeConfig bc;
      bc.bind_address = bind;
      bc.port = port;
      bc.static_dir = static_dir;
      BridgeServer server(broker, bc);
      server.start();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on " << bind << ":" << server.port() << "\n";
      node.run(g_stop, realtime);
      server.stop();
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Config);
  } catch (const GenerationError& e) {
    std::cerr << "generation error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Generation);
  } catch (const PlanError& e) {
    std::cerr << "plan error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return static_cast<int>(ExitCode::PlanFailure);
  } catch (const PlannerError& e) {
    std::cerr << "planner error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return static_cast<int>(ExitCode::Planner);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Config);
  }
  return 0;
}
