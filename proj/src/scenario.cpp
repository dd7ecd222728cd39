#include "stsync/scenario.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stsync/errors.hpp"

namespace stsync::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw IoError("scenario: key '" + key + "' has a malformed number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) {
    throw IoError("scenario: key '" + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    out.push_back(parse_double(key, tok));
  }
  return out;
}

// Edge tokens "j>i": agent i may read agent j's record.
std::vector<std::pair<int, int>> parse_edges(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::pair<int, int>> edges;
  std::string tok;
  while (in >> tok) {
    const auto gt = tok.find('>');
    if (gt == std::string::npos || gt == 0 || gt + 1 >= tok.size()) {
      throw IoError("scenario: edge token '" + tok + "' is not of the form j>i");
    }
    edges.emplace_back(parse_int("edges", tok.substr(0, gt)),
                       parse_int("edges", tok.substr(gt + 1)));
  }
  return edges;
}

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const char* what) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(std::string(what) + ": line " + std::to_string(lineno) +
                    " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw IoError(std::string(what) + ": empty key on line " + std::to_string(lineno));
    }
    if (!kv.emplace(key, value).second) {
      throw IoError(std::string(what) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

Eigen::MatrixXd to_matrix(const std::string& key, const std::vector<double>& v,
                          int rows, int cols) {
  if (static_cast<int>(v.size()) != rows * cols) {
    throw IoError("scenario: key '" + key + "' expects " +
                  std::to_string(rows * cols) + " numbers, got " +
                  std::to_string(v.size()));
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = v[static_cast<size_t>(r * cols + c)];
  return m;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_row_major(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += " ";
      out += fmt(m(r, c));
    }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << content;
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

Scenario parse_scenario(const std::string& text) {
  static const std::set<std::string> known{
      "n_agents", "state_dim", "input_dim", "a",       "b",
      "edges",    "s0",        "s_inf",     "lambda_s", "varrho",
      "eta0",     "x0",        "horizon",   "output_step", "tol_t",
      "tol_sigma", "kappa",    "lambda",    "kappa_theta", "theta",
      "epsilon_request", "out_dir"};
  auto kv = parse_key_values(text, "scenario");
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!known.count(key)) {
      throw IoError("scenario: unknown key '" + key + "'");
    }
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw IoError("scenario: missing required key '" + key + "'");
    }
    return it->second;
  };

  Scenario sc;
  sc.n_agents = parse_int("n_agents", need("n_agents"));
  sc.state_dim = parse_int("state_dim", need("state_dim"));
  sc.input_dim = parse_int("input_dim", need("input_dim"));
  if (sc.n_agents < 1 || sc.state_dim < 1 || sc.input_dim < 1) {
    throw IoError("scenario: n_agents, state_dim and input_dim must be positive");
  }
  sc.a = to_matrix("a", parse_numbers("a", need("a")), sc.state_dim, sc.state_dim);
  sc.b = to_matrix("b", parse_numbers("b", need("b")), sc.state_dim, sc.input_dim);
  sc.edges = parse_edges(need("edges"));
  sc.threshold.s0 = parse_double("s0", need("s0"));
  sc.threshold.s_inf = parse_double("s_inf", need("s_inf"));
  sc.threshold.lambda_s = parse_double("lambda_s", need("lambda_s"));
  sc.varrho = parse_double("varrho", need("varrho"));
  sc.eta0 = parse_double("eta0", need("eta0"));
  const auto x0v = parse_numbers("x0", need("x0"));
  if (static_cast<int>(x0v.size()) != sc.n_agents * sc.state_dim) {
    throw IoError("scenario: x0 expects " +
                  std::to_string(sc.n_agents * sc.state_dim) + " numbers, got " +
                  std::to_string(x0v.size()));
  }
  sc.x0 = Eigen::Map<const Eigen::VectorXd>(x0v.data(),
                                            static_cast<Eigen::Index>(x0v.size()));
  sc.horizon = parse_double("horizon", need("horizon"));
  if (kv.count("output_step")) sc.output_step = parse_double("output_step", kv["output_step"]);
  if (kv.count("tol_t")) sc.tol_t = parse_double("tol_t", kv["tol_t"]);
  if (kv.count("tol_sigma")) sc.tol_sigma = parse_double("tol_sigma", kv["tol_sigma"]);
  const bool has_kappa = kv.count("kappa") > 0;
  const bool has_lambda = kv.count("lambda") > 0;
  if (has_kappa != has_lambda) {
    throw IoError("scenario: kappa and lambda must be specified together");
  }
  if (has_kappa) {
    sc.contraction_pair = {parse_double("kappa", kv["kappa"]),
                           parse_double("lambda", kv["lambda"])};
  }
  const bool has_kth = kv.count("kappa_theta") > 0;
  const bool has_th = kv.count("theta") > 0;
  if (has_kth != has_th) {
    throw IoError("scenario: kappa_theta and theta must be specified together");
  }
  if (has_kth) {
    sc.plant_pair = {parse_double("kappa_theta", kv["kappa_theta"]),
                     parse_double("theta", kv["theta"])};
  }
  if (kv.count("epsilon_request")) {
    sc.epsilon_request = parse_double("epsilon_request", kv["epsilon_request"]);
  }
  if (kv.count("out_dir")) {
    sc.out_dir = kv["out_dir"];
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  const std::string bytes = read_file(path);
  Scenario sc = parse_scenario(bytes);
  sc.hash = fnv1a_hex(bytes);
  return sc;
}

synthesis::DesignCertificate design_from_scenario(const Scenario& sc) {
  const auto dyn = synthesis::make_dynamics(sc.a, sc.b);
  const auto g = graph::build_graph(sc.n_agents, sc.edges);
  synthesis::DesignOptions opt;
  opt.contraction_pair = sc.contraction_pair;
  opt.plant_pair = sc.plant_pair;
  opt.epsilon_request = sc.epsilon_request;
  return synthesis::design_pipeline(dyn, g, sc.threshold, sc.eta0, sc.varrho, opt);
}

void save_certificate(const synthesis::DesignCertificate& cert,
                      const std::string& scenario_hash, const std::string& path) {
  std::ostringstream os;
  os << "certificate_version = 1\n";
  os << "scenario_hash = " << scenario_hash << "\n";
  os << "n_agents = " << cert.n_agents << "\n";
  os << "state_dim = " << cert.gain.p.rows() << "\n";
  os << "input_dim = " << cert.gain.f.rows() << "\n";
  os << "p = " << fmt_row_major(cert.gain.p) << "\n";
  os << "f = " << fmt_row_major(cert.gain.f) << "\n";
  os << "varrho = " << fmt(cert.gain.rho) << "\n";
  os << "kappa_theta = " << fmt(cert.plant_bound.kappa) << "\n";
  os << "theta = " << fmt(cert.plant_bound.rate) << "\n";
  os << "kappa = " << fmt(cert.contraction.kappa) << "\n";
  os << "lambda = " << fmt(cert.lambda()) << "\n";
  os << "b_prime_norm = " << fmt(cert.b_prime_norm) << "\n";
  os << "beta = " << fmt_row_major(cert.beta.transpose()) << "\n";
  os << "gamma = " << fmt_row_major(cert.gamma.transpose()) << "\n";
  os << "tau_star = " << fmt_row_major(cert.tau_star.transpose()) << "\n";
  os << "epsilon = " << fmt(cert.epsilon) << "\n";
  os << "s0 = " << fmt(cert.threshold.s0) << "\n";
  os << "s_inf = " << fmt(cert.threshold.s_inf) << "\n";
  os << "lambda_s = " << fmt(cert.threshold.lambda_s) << "\n";
  os << "eta0 = " << fmt(cert.eta0) << "\n";
  os << "eta_bar = " << fmt(cert.eta_bar) << "\n";
  write_file(path, os.str());
}

std::pair<synthesis::DesignCertificate, std::string> load_certificate(
    const std::string& path) {
  auto kv = parse_key_values(read_file(path), "certificate");
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw IoError("certificate: missing key '" + key + "'");
    }
    return it->second;
  };
  if (parse_int("certificate_version", need("certificate_version")) != 1) {
    throw IoError("certificate: unsupported version");
  }
  synthesis::DesignCertificate cert;
  const std::string hash = need("scenario_hash");
  cert.n_agents = parse_int("n_agents", need("n_agents"));
  const int n = parse_int("state_dim", need("state_dim"));
  const int m = parse_int("input_dim", need("input_dim"));
  cert.gain.p = to_matrix("p", parse_numbers("p", need("p")), n, n);
  cert.gain.f = to_matrix("f", parse_numbers("f", need("f")), m, n);
  cert.gain.rho = parse_double("varrho", need("varrho"));
  cert.plant_bound = {parse_double("kappa_theta", need("kappa_theta")),
                      parse_double("theta", need("theta")), "plant"};
  const double kappa = parse_double("kappa", need("kappa"));
  const double lambda = parse_double("lambda", need("lambda"));
  cert.contraction = {kappa, -lambda, "acheck"};
  cert.b_prime_norm = parse_double("b_prime_norm", need("b_prime_norm"));
  auto vec = [&](const std::string& key) {
    const auto v = parse_numbers(key, need(key));
    if (static_cast<int>(v.size()) != cert.n_agents) {
      throw IoError("certificate: key '" + key + "' expects one entry per agent");
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  cert.beta = vec("beta");
  cert.gamma = vec("gamma");
  cert.tau_star = vec("tau_star");
  cert.epsilon = parse_double("epsilon", need("epsilon"));
  cert.threshold.s0 = parse_double("s0", need("s0"));
  cert.threshold.s_inf = parse_double("s_inf", need("s_inf"));
  cert.threshold.lambda_s = parse_double("lambda_s", need("lambda_s"));
  cert.eta0 = parse_double("eta0", need("eta0"));
  cert.eta_bar = parse_double("eta_bar", need("eta_bar"));
  auto [eta, eta_bar_recomputed] = synthesis::eta_envelope(
      cert.contraction.kappa, lambda, cert.n_agents, cert.b_prime_norm,
      cert.threshold, cert.eta0);
  (void)eta_bar_recomputed;
  cert.eta = std::move(eta);
  return {cert, hash};
}

void write_design_report(const synthesis::DesignCertificate& cert,
                         const std::string& path) {
  std::ostringstream os;
  os << "Self-triggered synchronization design\n";
  os << "=====================================\n";
  os << "agents: " << cert.n_agents << "\n";
  os << "riccati varrho: " << fmt(cert.gain.rho) << "\n";
  os << "P (row-major): " << fmt_row_major(cert.gain.p) << "\n";
  os << "F = B^T P (row-major): " << fmt_row_major(cert.gain.f) << "\n";
  os << "plant bound:       ||e^{A t}|| <= " << fmt(cert.plant_bound.kappa)
     << " * exp(" << fmt(cert.plant_bound.rate) << " t)\n";
  os << "contraction bound: kappa = " << fmt(cert.contraction.kappa)
     << ", lambda = " << fmt(cert.lambda()) << "\n";
  os << "||B'|| = " << fmt(cert.b_prime_norm) << "\n";
  os << "threshold: s0 = " << fmt(cert.threshold.s0)
     << ", s_inf = " << fmt(cert.threshold.s_inf)
     << ", lambda_s = " << fmt(cert.threshold.lambda_s) << "\n";
  os << "eta0 = " << fmt(cert.eta0) << ", eta_bar = " << fmt(cert.eta_bar) << "\n";
  os << "epsilon = " << fmt(cert.epsilon) << "\n";
  for (int i = 0; i < cert.n_agents; ++i) {
    os << "agent " << (i + 1) << ": beta = " << fmt(cert.beta(i))
       << ", gamma = " << fmt(cert.gamma(i))
       << ", tau_star = " << fmt(cert.tau_star(i)) << " s\n";
  }
  write_file(path, os.str());
}

engine::SimConfig make_sim_config(const Scenario& sc,
                                  const synthesis::DesignCertificate& cert) {
  engine::SimConfig config;
  config.dynamics = synthesis::make_dynamics(sc.a, sc.b);
  config.graph = graph::build_graph(sc.n_agents, sc.edges);
  config.certificate = cert;
  config.x0 = sc.x0;
  config.horizon = sc.horizon;
  config.output_step = sc.output_step;
  config.tol_t = sc.tol_t;
  config.tol_sigma = sc.tol_sigma;
  return config;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void write_report_files(const std::string& trajectory_csv,
                        const std::string& events_csv,
                        const std::string& summary_txt,
                        const std::string& out_dir) {
  const auto traj = read_csv(trajectory_csv);
  if (traj.empty() || traj[0].empty() || traj[0][0] != "t_s") {
    throw IoError("report: malformed trajectory CSV");
  }
  const auto& header = traj[0];
  size_t col_delta = 0;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "delta_norm") col_delta = c;
  }
  if (col_delta == 0) {
    throw IoError("report: trajectory CSV lacks a delta_norm column");
  }
  const auto summary = parse_key_values(read_file(summary_txt), "summary");
  auto it_eps = summary.find("epsilon");
  if (it_eps == summary.end()) {
    throw IoError("report: summary lacks epsilon");
  }
  const std::string eps = it_eps->second;

  std::filesystem::create_directories(out_dir);

  // delta vs the guaranteed tolerance band
  {
    std::ostringstream os;
    os << "t_s,delta_norm,eta,s,epsilon\n";
    for (size_t r = 1; r < traj.size(); ++r) {
      const auto& row = traj[r];
      if (row.size() <= col_delta + 2) {
        throw IoError("report: short row in trajectory CSV");
      }
      os << row[0] << "," << row[col_delta] << "," << row[col_delta + 1] << ","
         << row[col_delta + 2] << "," << eps << "\n";
    }
    write_file(out_dir + "/report_delta.csv", os.str());
  }
  // states only
  {
    std::ostringstream os;
    os << header[0];
    for (size_t c = 1; c < col_delta; ++c) os << "," << header[c];
    os << "\n";
    for (size_t r = 1; r < traj.size(); ++r) {
      os << traj[r][0];
      for (size_t c = 1; c < col_delta; ++c) os << "," << traj[r][c];
      os << "\n";
    }
    write_file(out_dir + "/report_states.csv", os.str());
  }
  // access raster over the last three seconds of the run
  {
    double t_end = 0.0;
    if (traj.size() > 1) {
      t_end = parse_double("t_s", traj.back()[0]);
    }
    const double t_lo = std::max(0.0, t_end - 3.0);
    const auto events = read_csv(events_csv);
    if (events.empty() || events[0].empty() || events[0][0] != "time_s") {
      throw IoError("report: malformed events CSV");
    }
    std::ostringstream os;
    os << "time_s,agent\n";
    for (size_t r = 1; r < events.size(); ++r) {
      if (events[r].size() < 2) {
        throw IoError("report: short row in events CSV");
      }
      const double t = parse_double("time_s", events[r][0]);
      if (t >= t_lo && t <= t_end) {
        os << events[r][0] << "," << events[r][1] << "\n";
      }
    }
    write_file(out_dir + "/report_raster.csv", os.str());
  }
}

}  // namespace stsync::io
