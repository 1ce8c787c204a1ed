#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "asymnet/sim/ber.hpp"
#include "asymnet/sim/config.hpp"
#include "asymnet/sim/metrics.hpp"
#include "asymnet/sim/simulator.hpp"
#include "asymnet/sim/vectors.hpp"
#include "asymnet/transport/model.hpp"

using namespace asymnet;
using nlohmann::json;

namespace {

// "1..8", "1,2,4" or "1..4,8"
std::vector<std::uint64_t> parse_list(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        auto lo = std::stoull(part.substr(0, dots)), hi = std::stoull(part.substr(dots + 2));
        if (lo > hi) throw ConfigError("empty range '" + part + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad list element '" + part + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// Invariant breaches a run must never show, whatever faults were scripted.
std::vector<std::string> invariant_violations(const sim::SimConfig& cfg, const sim::Metrics& m) {
  std::vector<std::string> v;
  if (m.violations.total()) v.push_back("runtime invariant counters nonzero");
  if (m.client.payload_mismatches) v.push_back("payload mismatch at client");
  if (m.client.provenance_errors) v.push_back("fragment provenance error at client");
  if (m.client.magic_errors) v.push_back("transport magic error");
  if (m.backend_phase == "failed") v.push_back("bootstrap failed: " + m.bootstrap_error);
  if (cfg.faults.empty() && cfg.ber == 0.0) {
    if (m.builder_phase == "halted") v.push_back("builder halted: " + m.halt_reason);
    if (m.client.events != m.client.verified_events) v.push_back("unverified events on a clean run");
    if (m.client.gaps) v.push_back("transport gaps on a clean run");
  }
  return v;
}

int report(const std::vector<std::string>& problems) {
  for (auto& p : problems) std::cerr << "violation: " << p << "\n";
  return problems.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymnet: simulator and test tools for an asymmetric TDM front-end link and DAQ chain"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario from a JSON config, emit JSON lines");
  std::string run_config, run_out, run_abstraction;
  std::int64_t run_seed = -1;
  double run_duration_us = 0;
  bool run_messages = false;
  run->add_option("config", run_config, "scenario config (JSON); '-' for defaults")->required();
  run->add_option("-o,--out", run_out, "output file (default stdout)");
  run->add_option("--seed", run_seed, "override the seed");
  run->add_option("--abstraction", run_abstraction, "override: message_level | symbol_level");
  run->add_option("--duration-us", run_duration_us, "override the run length");
  run->add_flag("--messages", run_messages, "append one line per delivered link frame");

  // ber
  auto* ber = app.add_subcommand("ber", "embedded PRBS bit error rate test");
  std::string ber_pattern = "PRBS31", ber_point = "payload", ber_inject;
  double ber_bits = 1e7, ber_rate = 0, ber_conf = 0.95;
  bool ber_ff = false;
  std::uint64_t ber_seed = 1;
  ber->add_option("--pattern", ber_pattern, "PRBS7 | PRBS15 | PRBS23 | PRBS31");
  ber->add_option("--bits", ber_bits, "effective bit count (e.g. 1.31e13)");
  ber->add_flag("--fast-forward", ber_ff, "jump-ahead mode for large bit counts");
  ber->add_option("--inject", ber_inject, "comma-separated bit positions to flip");
  ber->add_option("--inject-at", ber_point, "payload | line");
  ber->add_option("--channel-ber", ber_rate, "random line error rate (materialised mode)");
  ber->add_option("--confidence", ber_conf, "confidence level of the upper bound");
  ber->add_option("--seed", ber_seed, "seed for error draws and scrambler states");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "credit/MTU sweep, CSV on stdout");
  std::string sweep_credit = "1..8", sweep_mtu = "8192", sweep_out;
  unsigned sweep_cards = 32;
  double sweep_duration_us = 0;
  sweep->add_option("--credit", sweep_credit, "credits, e.g. 1..8");
  sweep->add_option("--mtu", sweep_mtu, "MTUs in bytes, e.g. 8192,1500");
  sweep->add_option("--cards", sweep_cards, "emulated front-end cards");
  sweep->add_option("--duration-us", sweep_duration_us, "run length per point");
  sweep->add_option("-o,--out", sweep_out, "output file (default stdout)");

  // bootstrap-check
  auto* boot = app.add_subcommand("bootstrap-check", "ID assignment over the simulated links");
  unsigned boot_n = 32;
  std::uint64_t boot_seed = 1, boot_reps = 1;
  std::string boot_absent;
  boot->add_option("-n", boot_n, "number of ports (1..32)");
  boot->add_option("--seed", boot_seed, "first seed");
  boot->add_option("--repeat", boot_reps, "number of seeds to run");
  boot->add_option("--absent", boot_absent, "comma-separated empty ports");

  // vectors
  auto* vec = app.add_subcommand("vectors", "golden vectors");
  vec->require_subcommand(1);
  auto* vec_emit = vec->add_subcommand("emit", "write the golden vector set");
  auto* vec_verify = vec->add_subcommand("verify", "check a golden vector file");
  std::string vec_out, vec_file = "vectors/golden.txt";
  vec_emit->add_option("-o,--out", vec_out, "output file (default stdout)");
  vec_verify->add_option("file", vec_file, "vector file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      json j = run_config == "-" ? json::object() : read_json_file(run_config);
      if (run_seed >= 0) j["seed"] = run_seed;
      if (!run_abstraction.empty()) j["abstraction"] = run_abstraction;
      if (run_duration_us > 0) j["duration_us"] = run_duration_us;
      if (run_messages) j["record_messages"] = true;
      auto cfg = sim::sim_config_from_json(j);
      sim::Simulation s(cfg);
      auto m = s.run();
      std::string text = json{{"record", "config"}, {"config", sim::to_json(cfg)}}.dump() + "\n" + to_json_lines(m);
      if (run_messages)
        for (auto& r : s.messages()) text += json{{"record", "message"}, {"text", sim::to_string(r)}}.dump() + "\n";
      write_text(run_out, text);
      return report(invariant_violations(cfg, m));
    }

    if (*ber) {
      sim::BerConfig c;
      c.order = wire::parse_prbs_order(ber_pattern);
      if (!(ber_bits >= 1)) throw ConfigError("--bits must be at least 1");
      c.total_bits = static_cast<std::uint64_t>(ber_bits);
      c.fast_forward = ber_ff;
      c.channel_ber = ber_rate;
      c.confidence = ber_conf;
      c.seed = ber_seed;
      if (ber_point == "payload") c.injection_point = sim::InjectionPoint::Payload;
      else if (ber_point == "line") c.injection_point = sim::InjectionPoint::Line;
      else throw ConfigError("--inject-at must be payload or line");
      if (!ber_inject.empty()) c.injections = parse_list(ber_inject);
      auto r = sim::ber_test(c);
      std::cout << json{{"record", "ber"},
                        {"pattern", ber_pattern},
                        {"bits", r.bits},
                        {"fast_forward", c.fast_forward},
                        {"materialised_bits", r.materialised_bits},
                        {"errors", r.errors},
                        {"checker_bit_errors", r.bit_errors},
                        {"injected", r.injected},
                        {"injections_detected", r.injections_detected},
                        {"state_check_ok", r.state_check_ok},
                        {"ber_estimate", r.ber_estimate},
                        {"confidence", c.confidence},
                        {"upper_bound", r.upper_bound}}
                       .dump()
                << "\n";
      std::vector<std::string> v;
      if (r.injections_detected != r.injected) v.push_back("injected error not detected");
      if (!r.state_check_ok) v.push_back("generator and checker states disagree");
      if (c.injections.empty() && c.channel_ber == 0 && r.bit_errors) v.push_back("errors on an error-free link");
      return report(v);
    }

    if (*sweep) {
      auto credits = parse_list(sweep_credit);
      auto mtus = parse_list(sweep_mtu);
      std::ostringstream os;
      os << "credit,mtu,MB_per_s,model_MB_per_s,saturation_MB_per_s,events,incomplete,gaps\n";
      os.setf(std::ios::fixed);
      os.precision(3);
      std::vector<std::string> v;
      for (auto mtu : mtus) {
        for (auto cr : credits) {
          auto cfg = sim::credit_sweep_scenario(static_cast<std::uint32_t>(cr), mtu, sweep_cards);
          if (sweep_duration_us > 0) cfg.duration = sim::detail::us(sweep_duration_us);
          cfg.validate();
          auto m = sim::run_scenario(cfg);
          double model = transport::throughput_model(cfg.transport.link_rate_bps, static_cast<double>(mtu),
                                                     static_cast<double>(cr), to_seconds(cfg.transport.rtt));
          os << cr << "," << mtu << "," << m.client_MB_per_s << "," << model << ","
             << transport::saturation_throughput(cfg.transport.link_rate_bps, static_cast<double>(mtu)) << ","
             << m.client.events << "," << m.client.incomplete_events << "," << m.client.gaps << "\n";
          for (auto& p : invariant_violations(cfg, m)) v.push_back("credit " + std::to_string(cr) + " mtu " + std::to_string(mtu) + ": " + p);
        }
      }
      write_text(sweep_out, os.str());
      return report(v);
    }

    if (*boot) {
      std::vector<std::string> v;
      std::uint64_t all_ok = 0;
      for (std::uint64_t rep = 0; rep < boot_reps; ++rep) {
        sim::SimConfig c;
        c.num_frontends = boot_n;
        c.seed = boot_seed + rep;
        c.duration = 2 * kPicosPerMilli;
        c.trigger.source = backend::TriggerSource::Software;
        c.transport.enabled = false;
        if (!boot_absent.empty())
          for (auto p : parse_list(boot_absent)) c.absent_ports.push_back(static_cast<unsigned>(p));
        c.validate();
        auto m = sim::run_scenario(c);
        unsigned matched = 0;
        for (auto& l : m.links) {
          bool ok = l.present ? l.assigned_id == static_cast<int>(l.link) && l.active : l.assigned_id < 0;
          matched += l.present && ok;
          if (!ok) v.push_back("seed " + std::to_string(c.seed) + " port " + std::to_string(l.link) + " id " + std::to_string(l.assigned_id));
          if (boot_reps == 1)
            std::cout << json{{"record", "port"}, {"port", l.link}, {"present", l.present}, {"assigned_id", l.assigned_id},
                              {"active", l.active}}
                             .dump()
                      << "\n";
        }
        unsigned present = boot_n - static_cast<unsigned>(c.absent_ports.size());
        if (m.bootstrap_verified != present) v.push_back("seed " + std::to_string(c.seed) + ": " + m.bootstrap_error);
        bool ok = matched == present && m.bootstrap_verified == present;
        all_ok += ok;
        std::cout << "seed " << c.seed << ": " << m.bootstrap_verified << "/" << present << " IDs verified"
                  << (ok ? "" : " FAIL") << "\n";
      }
      if (boot_reps > 1) std::cout << all_ok << "/" << boot_reps << " seeds passed\n";
      return report(v);
    }

    if (*vec_emit) {
      write_text(vec_out, sim::emit_vectors());
      return 0;
    }
    if (*vec_verify) {
      std::ifstream in(vec_file);
      if (!in) throw ConfigError("cannot open " + vec_file);
      auto r = sim::verify_vectors(in);
      for (auto& f : r.failures) std::cerr << f << "\n";
      std::cout << (r.total - r.failures.size()) << "/" << r.total << " vectors pass\n";
      return r.ok() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
