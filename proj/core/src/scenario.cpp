#include "optcons/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "optcons/asymptotic.hpp"
#include "optcons/errors.hpp"
#include "optcons/gramian.hpp"

namespace optcons {

namespace {

struct Field {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Field>;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void error(int line, std::string_view field,
                          const std::string& what) const {
    std::string where = origin_ + ":" + std::to_string(line);
    if (!field.empty()) where += ": field '" + std::string(field) + "'";
    fail(ErrorCode::ParseError, where + ": " + what);
  }

  double number(const Field& f, std::string_view key) const {
    return number_text(f.value, f.line, key);
  }

  double number_text(const std::string& text, int line,
                     std::string_view key) const {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      error(line, key, "expected a number, got '" + t + "'");
    return v;
  }

  Vector vector(const Field& f, std::string_view key) const {
    std::string body = trim(f.value);
    if (!body.empty() && body.front() == '[' && body.back() == ']')
      body = body.substr(1, body.size() - 2);
    const auto parts = split(body, ',');
    Vector v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = number_text(parts[i], f.line, key);
    return v;
  }

  Matrix matrix(const Field& f, std::string_view key) const {
    const std::string body = trim(f.value);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      error(f.line, key, "matrices are written as [a, b; c, d]");
    const auto rows = split(std::string_view(body).substr(1, body.size() - 2), ';');
    std::vector<std::vector<double>> values;
    for (const auto& r : rows) {
      std::vector<double> row;
      for (const auto& cell : split(r, ',')) row.push_back(number_text(cell, f.line, key));
      if (!values.empty() && row.size() != values.front().size())
        error(f.line, key, "rows have different lengths");
      values.push_back(std::move(row));
    }
    Matrix M(values.size(), values.front().size());
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = 0; j < values[i].size(); ++j) M(i, j) = values[i][j];
    return M;
  }

  std::map<std::string, Section> sections(std::string_view text) {
    std::map<std::string, Section> out;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') error(line_no, "", "unterminated section header");
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (out.count(current)) error(line_no, "", "duplicate section [" + current + "]");
        out[current];
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) error(line_no, "", "expected key = value");
      if (current.empty()) error(line_no, "", "key outside of a section");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      Section& sec = out[current];
      if (sec.count(key)) error(line_no, key, "duplicate key");
      sec[key] = Field{trim(std::string_view(line).substr(eq + 1)), line_no};
    }
    return out;
  }

 private:
  std::string origin_;
};

const Field* find(const Section& s, const std::string& key) {
  const auto it = s.find(key);
  return it == s.end() ? nullptr : &it->second;
}

LtiSystem build_system(const Parser& parser, const Section& sec,
                       const std::string& section_name) {
  Matrix M[3];
  const char* names[3] = {"A", "B", "C"};
  for (int k = 0; k < 3; ++k) {
    const Field* f = find(sec, names[k]);
    if (!f) parser.error(0, names[k], "missing in [" + section_name + "]");
    M[k] = parser.matrix(*f, names[k]);
  }
  try {
    return LtiSystem(M[0], M[1], M[2]);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, "[" + section_name + "]: " + e.what());
  }
}

}  // namespace

AgentNetwork Scenario::network() const { return AgentNetwork(systems); }

Vector Scenario::stacked_initial_state() const {
  Eigen::Index total = 0;
  for (const auto& x : initial_states) total += x.size();
  Vector out(total);
  Eigen::Index off = 0;
  for (const auto& x : initial_states) {
    out.segment(off, x.size()) = x;
    off += x.size();
  }
  return out;
}

FiniteTimeProblem Scenario::problem() const {
  if (!T) fail(ErrorCode::ValidationError, "finite-time scenario needs T");
  return FiniteTimeProblem{network(), weight_vector(), stacked_initial_state(),
                           t0, *T, eps_switch, QuadratureConfig{}};
}

double Scenario::end_time() const {
  if (finite_time()) return T.value_or(t0);
  return t_end.value_or(t0);
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Parser parser(origin);
  const auto sections = parser.sections(text);
  const auto section = [&](const std::string& name) -> const Section* {
    const auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  };

  Scenario s;
  s.source = origin;
  const Section* head = section("scenario");
  if (!head) parser.error(1, "", "missing [scenario] section");

  if (const Field* f = find(*head, "name")) s.name = f->value;
  else s.name = std::filesystem::path(origin).stem().string();

  const Field* ctrl = find(*head, "controller");
  if (!ctrl) parser.error(1, "controller", "missing in [scenario]");
  const auto kind = parse_law_kind(ctrl->value);
  if (!kind || *kind == LawKind::TopologyRestricted)
    parser.error(ctrl->line, "controller", "unknown controller '" + ctrl->value + "'");
  s.controller = *kind;

  const Field* w = find(*head, "weights");
  if (!w) parser.error(1, "weights", "missing in [scenario]");
  s.weights = parser.vector(*w, "weights");
  const int N = static_cast<int>(s.weights.size());

  if (const Field* f = find(*head, "t0")) s.t0 = parser.number(*f, "t0");
  if (const Field* f = find(*head, "T")) s.T = parser.number(*f, "T");
  if (const Field* f = find(*head, "t_end")) s.t_end = parser.number(*f, "t_end");
  if (const Field* f = find(*head, "eps_switch"))
    s.eps_switch = parser.number(*f, "eps_switch");
  if (s.finite_time() && !s.T)
    parser.error(ctrl->line, "T", "finite-time controllers need T in [scenario]");
  if (!s.finite_time() && !s.t_end)
    parser.error(ctrl->line, "t_end", "asymptotic controllers need t_end in [scenario]");

  if (const Section* sys = section("system")) {
    const LtiSystem shared = build_system(parser, *sys, "system");
    s.systems.assign(static_cast<std::size_t>(std::max(N, 0)), shared);
  } else {
    for (int i = 1; i <= N; ++i) {
      const std::string name = "agent." + std::to_string(i);
      const Section* agent = section(name);
      if (!agent)
        parser.error(1, "", "missing [system] or [" + name + "] section");
      s.systems.push_back(build_system(parser, *agent, name));
    }
  }

  const Section* init = section("initial");
  if (!init) parser.error(1, "", "missing [initial] section");
  for (int i = 1; i <= N; ++i) {
    const std::string key = "x" + std::to_string(i);
    const Field* f = find(*init, key);
    if (!f) parser.error(1, key, "missing initial state in [initial]");
    s.initial_states.push_back(parser.vector(*f, key));
  }

  if (const Section* integ = section("integrator")) {
    if (const Field* f = find(*integ, "method")) {
      if (f->value == "rk4") s.sim.method = Integrator::RK4;
      else if (f->value == "rk45") s.sim.method = Integrator::RK45;
      else parser.error(f->line, "method", "expected rk4 or rk45");
    }
    if (const Field* f = find(*integ, "step")) s.sim.step = parser.number(*f, "step");
  }

  s.trajectory_path = s.name + ".csv";
  s.report_path = s.name + ".report";
  if (const Section* out = section("output")) {
    if (const Field* f = find(*out, "trajectory")) s.trajectory_path = f->value;
    if (const Field* f = find(*out, "report")) s.report_path = f->value;
  }

  if (const Section* cert = section("certify")) {
    const Field* f = find(*cert, "K");
    if (!f) parser.error(1, "K", "missing in [certify]");
    for (const auto& part : split(f->value, ',')) {
      const double k = parser.number_text(part, f->line, "K");
      if (k != std::floor(k) || k < 2) parser.error(f->line, "K", "grid sizes must be integers >= 2");
      s.certify_K.push_back(static_cast<int>(k));
    }
  }

  if (const Section* topo = section("topology")) {
    const Field* f = find(*topo, "edges");
    if (!f) parser.error(1, "edges", "missing in [topology]");
    std::vector<Edge> edges;
    if (!trim(f->value).empty()) {
      for (const auto& item : split(f->value, ',')) {
        const auto colon = item.find(':');
        const std::string pair = item.substr(0, colon);
        const auto dash = pair.find('-');
        if (dash == std::string::npos) parser.error(f->line, "edges", "edges are written i-j[:weight]");
        Edge e;
        e.i = static_cast<int>(parser.number_text(pair.substr(0, dash), f->line, "edges")) - 1;
        e.j = static_cast<int>(parser.number_text(pair.substr(dash + 1), f->line, "edges")) - 1;
        if (colon != std::string::npos)
          e.weight = parser.number_text(item.substr(colon + 1), f->line, "edges");
        edges.push_back(e);
      }
    }
    try {
      s.topology = TopologyGraph(N, std::move(edges));
    } catch (const Error& e) {
      parser.error(f->line, "edges", e.what());
    }
  }
  return s;
}

void validate_scenario(const Scenario& s) {
  const auto invalid = [](const std::string& what) {
    fail(ErrorCode::ValidationError, what);
  };
  if (s.weights.size() < 2) invalid("at least two agents (weights) are required");
  for (Eigen::Index i = 0; i < s.weights.size(); ++i)
    if (!(s.weights(i) > 0.0)) invalid("weights must be positive");
  if (static_cast<Eigen::Index>(s.systems.size()) != s.weights.size())
    invalid("agent count differs from weight count");
  for (std::size_t i = 0; i < s.systems.size(); ++i)
    if (s.initial_states[i].size() != s.systems[i].n())
      invalid("x" + std::to_string(i + 1) + " has length " +
              std::to_string(s.initial_states[i].size()) + ", agent " +
              std::to_string(i + 1) + " has " + std::to_string(s.systems[i].n()) +
              " states");
  if (s.sim.step < 0.0) invalid("integrator step must be positive");

  const AgentNetwork net = [&] {
    try {
      return s.network();
    } catch (const Error& e) {
      fail(ErrorCode::ValidationError, e.what());
    }
  }();

  if (s.finite_time()) {
    if (!(*s.T > s.t0)) invalid("T must exceed t0");
    if (s.eps_switch && !(*s.eps_switch > 0.0 && *s.eps_switch < *s.T - s.t0))
      invalid("eps_switch must lie in (0, T - t0)");
    for (int i = 0; i < net.size(); ++i) {
      if (!is_output_controllable(net.agent(i), *s.T - s.t0))
        invalid("agent " + std::to_string(i + 1) +
                " not output controllable on [" + std::to_string(s.t0) + ", " +
                std::to_string(*s.T) + "]");
    }
    if (s.controller != LawKind::HeterogeneousFT && !net.homogeneous())
      invalid(std::string(to_string(s.controller)) +
              " requires identical agents; use controller = heterogeneous");
    if (s.controller == LawKind::OutputFeedbackFT &&
        !is_kernel_A_invariant(net.agent(0)))
      invalid("output_feedback requires ker(C) to be A-invariant "
              "(invariance check failed)");
  } else {
    if (!(*s.t_end > s.t0)) invalid("t_end must exceed t0");
    if (!net.homogeneous()) invalid("asymptotic controllers require identical agents");
    try {
      make_asymptotic_law(net.agent(0), s.weight_vector(), s.controller);
    } catch (const Error& e) {
      fail(ErrorCode::ValidationError, e.what());
    }
  }

  if (s.topology) {
    if (!s.finite_time() || !net.homogeneous())
      invalid("topology comparison needs a homogeneous finite-time scenario");
    if (!is_kernel_A_invariant(net.agent(0)))
      invalid("topology comparison uses output gains and requires ker(C) to "
              "be A-invariant (invariance check failed)");
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path.string());
  validate_scenario(s);
  return s;
}

}  // namespace optcons
