// shimura-cert: prime family scans, special-fiber graph builds and exports,
// embedding-divisor vectors, Smith normal forms, and full certificates.
//
// Exit codes: 0 = the command ran (any verdict), 2 = hard internal error,
// 3 = the requested case is outside the supported regime.

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shimura/screen.hpp"

using namespace shimura;
using nlohmann::json;

namespace {

struct ExitWith {
  int code;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json cfg = json::parse(in);
  if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
  return cfg;
}

// flag wins over config file wins over default
template <typename T>
T pick(const CLI::Option* opt, const T& flag_value, const json& cfg,
       const std::string& key, const T& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (cfg.contains(key)) return cfg.at(key).get<T>();
  return fallback;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write: " + out_path);
  out << text << "\n";
  std::cerr << "wrote " << out_path << "\n";
}

GrossNorm parse_norm(const std::string& s) {
  if (s == "automorphism" || s == "aut") return GrossNorm::kAutomorphism;
  if (s == "width") return GrossNorm::kWidth;
  throw std::runtime_error("unknown normalization: " + s);
}

std::vector<Int> generic_scan(const Int& q, const std::vector<Int>& discs,
                              const Int& lo, const Int& hi) {
  if (lo < 0 || hi < lo || (hi >> 62) != 0)
    throw std::runtime_error("bad scan range");
  std::vector<Int> out;
  for (u64 n = lo < 3 ? 3 : lo.convert_to<u64>(); n <= hi.convert_to<u64>(); ++n) {
    if (!is_prime(n) || Int(n) == q) continue;
    Int p(n);
    if (p % 4 != 1) continue;
    if (kronecker(q, p) != -1) continue;
    bool ok = true;
    for (const Int& d : discs) ok = ok && kronecker(-d, p) != -1;
    if (ok) out.push_back(p);
  }
  return out;
}

struct GraphBundle {
  DualGraph g;
  ALAction wq;
  ALAction wp;
  QuotientGraph qg;
  ResolvedGraph rg;
  ExceptionalComponent exc;
  GraphBundle(const Int& p, const Int& q, u64 seed)
      : g(build_graph(p, q, seed)),
        wq(atkin_lehner(g, q)),
        wp(atkin_lehner(g, p)),
        qg(quotient_by(g, wq)),
        rg(desingularize(qg)),
        exc(exceptional_component(g, wp, qg, rg)) {}
};

json graph_summary(const GraphBundle& b, u64 seed) {
  GraphShape full = graph_shape(b.g.vertex_count(), edge_endpoints(b.g));
  GraphShape quot = graph_shape(b.qg.vertex_count(), edge_endpoints(b.qg));
  GraphShape res = graph_shape(b.rg.vertices, b.rg.edges);
  json out;
  out["p"] = b.g.p.convert_to<i64>();
  out["q"] = b.g.alg.q.convert_to<i64>();
  out["seed"] = seed;
  out["classes"] = b.g.h();
  out["vertices"] = b.g.vertex_count();
  out["edge_classes"] = b.g.edges.size();
  out["rank_h1"] = full.h1;
  out["quotient"] = {{"orbits", b.qg.orbit_count()},
                     {"vertices", b.qg.vertex_count()},
                     {"edges", b.qg.edges.size()},
                     {"rank_h1", quot.h1}};
  out["resolved"] = {{"vertices", b.rg.vertices}, {"edges", b.rg.edges.size()}};
  out["exceptional"] = {{"vertex", b.exc.vertex},
                        {"quotient_edge", b.exc.qedge},
                        {"non_disconnecting", b.exc.non_disconnecting}};
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"certificates for rational points on involution quotients of "
               "totally degenerate curves"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override it");

  // shared option targets
  i64 q_flag = 251, p_flag = 0, pmin_flag = 2, pmax_flag = 0;
  std::vector<i64> p_list_flag, discs_flag;
  u64 seed_flag = 1;
  i64 hbound_flag = 2, dmax_flag = 300, classbound_flag = 100000;
  int jobs_flag = 1;
  std::string norm_flag = "automorphism", out_flag, format_flag = "dot", in_flag;
  bool labels_flag = false, transforms_flag = false;
  i64 disc_flag = 0;

  auto* scan = app.add_subcommand("scan", "primes passing the congruence screen");
  auto* scan_q = scan->add_option("--q", q_flag, "level prime (family canned for 251)");
  auto* scan_pmin = scan->add_option("--p-min", pmin_flag, "scan lower bound");
  auto* scan_pmax = scan->add_option("--p-max", pmax_flag, "scan upper bound");
  auto* scan_discs = scan->add_option("--discs", discs_flag,
                                      "positive D list for a generic family screen")
                         ->delimiter(',');
  auto* scan_out = scan->add_option("--out", out_flag, "output path (default stdout)");

  auto* graph = app.add_subcommand("graph", "special-fiber dual graph");
  graph->require_subcommand(1);
  auto* gbuild = graph->add_subcommand("build", "build and summarize");
  auto* gb_q = gbuild->add_option("--q", q_flag, "level prime, 3 mod 4");
  auto* gb_p = gbuild->add_option("--p", p_flag, "reduction prime")->required();
  auto* gb_seed = gbuild->add_option("--seed", seed_flag, "enumeration seed");
  auto* gb_out = gbuild->add_option("--out", out_flag, "output path");
  auto* gexport = graph->add_subcommand("export", "emit dot or json");
  auto* ge_q = gexport->add_option("--q", q_flag, "level prime, 3 mod 4");
  auto* ge_p = gexport->add_option("--p", p_flag, "reduction prime")->required();
  auto* ge_seed = gexport->add_option("--seed", seed_flag, "enumeration seed");
  auto* ge_out = gexport->add_option("--out", out_flag, "output path");
  gexport->add_option("--format", format_flag, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));
  gexport->add_flag("--labels", labels_flag, "attach j-invariant labels");

  auto* cert = app.add_subcommand("cert", "full certificate for (p, q)");
  auto* cert_q = cert->add_option("--q", q_flag, "level prime, 3 mod 4");
  auto* cert_p = cert->add_option("--p", p_list_flag, "reduction prime (repeatable)")
                     ->delimiter(',');
  auto* cert_discs =
      cert->add_option("--discs", discs_flag, "discriminant list, e.g. 4,28,36,267")
          ->delimiter(',');
  auto* cert_norm = cert->add_option("--norm", norm_flag, "automorphism or width");
  auto* cert_hb = cert->add_option("--h-bound", hbound_flag,
                                   "class number cap for the fallback disc scan");
  auto* cert_dm = cert->add_option("--d-max", dmax_flag, "fallback disc scan bound");
  auto* cert_cb = cert->add_option("--class-bound", classbound_flag,
                                   "largest |disc| for class number checks");
  auto* cert_seed = cert->add_option("--seed", seed_flag, "enumeration seed");
  auto* cert_jobs = cert->add_option("--jobs", jobs_flag, "parallel pipelines");
  auto* cert_out = cert->add_option("--out", out_flag, "output path");

  auto* gross = app.add_subcommand("gross", "embedding divisor of one discriminant");
  auto* gr_q = gross->add_option("--q", q_flag, "level prime, 3 mod 4");
  auto* gr_p = gross->add_option("--p", p_flag, "reduction prime")->required();
  gross->add_option("--disc", disc_flag, "positive D, vector for -D")->required();
  auto* gr_norm = gross->add_option("--norm", norm_flag, "automorphism or width");
  auto* gr_seed = gross->add_option("--seed", seed_flag, "enumeration seed");
  auto* gr_out = gross->add_option("--out", out_flag, "output path");

  auto* snfc = app.add_subcommand("snf", "Smith normal form of a JSON matrix");
  snfc->add_option("--in", in_flag, "JSON 2d array (default stdin)");
  snfc->add_flag("--transforms", transforms_flag, "include the unimodular transforms");
  auto* snf_out = snfc->add_option("--out", out_flag, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    throw ExitWith{code == 0 ? 0 : 2};
  }
  json cfg = load_config(config_path);

  if (*scan) {
    ScreenConfig sc;
    sc.q = pick<i64>(scan_q, q_flag, cfg, "q", 251);
    sc.p_min = pick<i64>(scan_pmin, pmin_flag, cfg, "p_min", 2);
    sc.p_max = pick<i64>(scan_pmax, pmax_flag, cfg, "p_max", 100000);
    validate(sc);
    std::vector<i64> dl = pick<std::vector<i64>>(scan_discs, discs_flag, cfg, "discs", {});
    std::vector<Int> primes;
    if (!dl.empty()) {
      std::vector<Int> ds(dl.begin(), dl.end());
      primes = generic_scan(sc.q, ds, sc.p_min, sc.p_max);
    } else if (sc.q == 251) {
      primes = congruence_scan(sc.p_min, sc.p_max);
    } else {
      throw UnsupportedCase(
          "the canned congruence family is defined at q = 251; pass --discs to "
          "screen another level");
    }
    json out;
    out["q"] = sc.q.convert_to<i64>();
    out["p_min"] = sc.p_min.convert_to<i64>();
    out["p_max"] = sc.p_max.convert_to<i64>();
    json arr = json::array();
    for (const Int& p : primes) arr.push_back(p.convert_to<i64>());
    out["count"] = primes.size();
    out["primes"] = arr;
    emit(pick<std::string>(scan_out, out_flag, cfg, "out", ""), out.dump(2));
    return 0;
  }

  if (*graph) {
    bool exporting = static_cast<bool>(*gexport);
    Int q = pick<i64>(exporting ? ge_q : gb_q, q_flag, cfg, "q", 251);
    Int p(p_flag);
    u64 seed = pick<u64>(exporting ? ge_seed : gb_seed, seed_flag, cfg, "seed", 1);
    std::cerr << "seed " << seed << "\n";
    if (!exporting) {
      GraphBundle b(p, q, seed);
      emit(pick<std::string>(gb_out, out_flag, cfg, "out", ""),
           graph_summary(b, seed).dump(2));
      return 0;
    }
    DualGraph g = build_graph(p, q, seed);
    JLabels labels;
    const JLabels* lp = nullptr;
    if (labels_flag) {
      labels = label_vertices_by_j(g, supersingular_polynomial(q.convert_to<u64>()));
      if (labels.ambiguous)
        std::cerr << "label matching is ambiguous (" << labels.solutions
                  << " solutions); emitting the first\n";
      lp = &labels;
    }
    std::string text = format_flag == "dot" ? graph_to_dot(g, lp) : graph_to_json(g, lp);
    emit(pick<std::string>(ge_out, out_flag, cfg, "out", ""), text);
    return 0;
  }

  if (*cert) {
    ScreenConfig sc;
    sc.q = pick<i64>(cert_q, q_flag, cfg, "q", 251);
    std::vector<i64> pl = pick<std::vector<i64>>(cert_p, p_list_flag, cfg, "p_list", {});
    if (pl.empty()) throw std::runtime_error("cert needs at least one --p");
    sc.p_list.assign(pl.begin(), pl.end());
    std::vector<i64> dl = pick<std::vector<i64>>(cert_discs, discs_flag, cfg, "discs", {});
    sc.cert.discs.assign(dl.begin(), dl.end());
    sc.cert.disc_h_bound = pick<i64>(cert_hb, hbound_flag, cfg, "disc_h_bound", 2);
    sc.cert.disc_max = pick<i64>(cert_dm, dmax_flag, cfg, "disc_max", 300);
    sc.cert.class_number_bound =
        pick<i64>(cert_cb, classbound_flag, cfg, "class_number_bound", 100000);
    sc.cert.seed = pick<u64>(cert_seed, seed_flag, cfg, "seed", 1);
    sc.cert.norm = parse_norm(pick<std::string>(cert_norm, norm_flag, cfg, "norm",
                                                "automorphism"));
    sc.jobs = pick<int>(cert_jobs, jobs_flag, cfg, "jobs", 1);
    validate(sc);
    std::cerr << "seed " << sc.cert.seed << "\n";

    std::vector<std::string> results(sc.p_list.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (size_t i = next.fetch_add(1); i < sc.p_list.size(); i = next.fetch_add(1))
        results[i] = certificate_to_json(certify(sc.p_list[i], sc.q, sc.cert));
    };
    size_t threads = std::min<size_t>(sc.jobs, sc.p_list.size());
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    std::string text;
    if (results.size() == 1) {
      text = results[0];
    } else {
      json arr = json::array();
      for (const auto& r : results) arr.push_back(json::parse(r));
      text = arr.dump(2);
    }
    emit(pick<std::string>(cert_out, out_flag, cfg, "out", ""), text);
    return 0;
  }

  if (*gross) {
    Int q = pick<i64>(gr_q, q_flag, cfg, "q", 251);
    Int p(p_flag);
    u64 seed = pick<u64>(gr_seed, seed_flag, cfg, "seed", 1);
    GrossNorm norm =
        parse_norm(pick<std::string>(gr_norm, norm_flag, cfg, "norm", "automorphism"));
    std::cerr << "seed " << seed << "\n";
    DualGraph g = build_graph(p, q, seed);
    QuotientGraph qg = quotient_by(g, atkin_lehner(g, q));
    GrossVector v = gross_vector(g, edge_orders(g), Int(disc_flag), norm);
    if (v.supported) v.pushed = pushforward(qg, v.coeff);
    emit(pick<std::string>(gr_out, out_flag, cfg, "out", ""), gross_to_json(g, v));
    return 0;
  }

  if (*snfc) {
    json jm;
    if (in_flag.empty()) {
      jm = json::parse(std::cin);
    } else {
      std::ifstream in(in_flag);
      if (!in) throw std::runtime_error("cannot open: " + in_flag);
      jm = json::parse(in);
    }
    if (!jm.is_array() || jm.empty() || !jm[0].is_array())
      throw std::runtime_error("snf expects a JSON array of rows");
    ZMat a;
    for (const auto& row : jm) {
      std::vector<Int> r;
      for (const auto& e : row)
        r.push_back(e.is_string() ? Int(e.get<std::string>()) : Int(e.get<i64>()));
      a.push_back(r);
      if (a.back().size() != a[0].size())
        throw std::runtime_error("snf expects a rectangular matrix");
    }
    SnfResult s = snf(a);
    json out;
    out["rows"] = a.size();
    out["cols"] = a[0].size();
    out["rank"] = s.rank;
    json inv = json::array();
    for (const auto& f : s.invariants) inv.push_back(f.str());
    out["invariants"] = inv;
    if (transforms_flag) {
      auto dump_mat = [](const ZMat& m) {
        json rows = json::array();
        for (const auto& r : m) {
          json row = json::array();
          for (const auto& e : r) row.push_back(e.str());
          rows.push_back(row);
        }
        return rows;
      };
      out["u"] = dump_mat(s.u);
      out["v"] = dump_mat(s.v);
      out["d"] = dump_mat(s.d);
    }
    emit(pick<std::string>(snf_out, out_flag, cfg, "out", ""), out.dump(2));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ExitWith& e) {
    return e.code;
  } catch (const UnsupportedCase& e) {
    std::cerr << "unsupported case: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
