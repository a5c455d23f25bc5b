#include "uavplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace uavplan {

void SimParams::set_default_weights() {
  weights = VecX::Constant(num_uavs + 1, 1.0 / (num_uavs + 1));
}

void SimParams::validate() const {
  std::vector<std::string> bad;
  auto req = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };
  req(bandwidth_hz > 0, "bandwidth_hz must be > 0");
  req(slot_duration_s > 0, "slot_duration_s must be > 0");
  req(num_slots > 0, "num_slots must be > 0");
  req(num_blocks > 0, "num_blocks must be > 0");
  req(num_uavs > 0, "num_uavs must be > 0");
  req(num_users > 0, "num_users must be > 0");
  req(bs_antennas > 0, "bs_antennas must be > 0");
  req(uav_antennas > 0, "uav_antennas must be > 0");
  req(bs_antennas >= num_uavs, "bs_antennas must be >= num_uavs");
  req(static_cast<long>(num_uavs) * uav_antennas >= num_users,
      "num_uavs * uav_antennas must be >= num_users");
  req(p_bs_max > 0, "p_bs_max must be > 0");
  req(p_uav_max > 0, "p_uav_max must be > 0");
  req(nav_c1 >= 0, "nav_c1 must be >= 0");
  req(nav_c2 > 0, "nav_c2 must be > 0");
  req(noise_psd > 0, "noise_psd must be > 0");
  req(max_speed > 0, "max_speed must be > 0");
  req(r_min_bps > 0, "r_min_bps must be > 0");
  req(d_min > 0, "d_min must be > 0");
  req(rice_factor > 0, "rice_factor must be > 0");
  req(pathloss_exponent_data > 0, "pathloss_exponent_data must be > 0");
  req(pathloss_exponent_fh > 0, "pathloss_exponent_fh must be > 0");
  req(antenna_gain_data > 0, "antenna_gain_data must be > 0");
  req(antenna_gain_fh > 0, "antenna_gain_fh must be > 0");
  req(beta >= 0, "beta must be >= 0");
  req(d_max() > 0, "max_speed * slot_duration_s must be > 0");
  if (weights.size() != num_uavs + 1) {
    bad.push_back("weights must have num_uavs + 1 entries");
  } else {
    bool in_range = true;
    for (int i = 0; i < weights.size(); ++i)
      in_range = in_range && weights(i) >= 0.0 && weights(i) <= 1.0;
    req(in_range, "weights must lie in [0,1]");
    req(std::abs(weights.sum() - 1.0) <= 1e-9, "weights must sum to 1");
  }
  if (!bad.empty()) {
    std::string msg = "invalid parameters:";
    for (const auto& m : bad) msg += "\n  - " + m;
    throw ParameterError(msg);
  }
}

SimParams SimParams::paper_defaults() {
  SimParams p;
  p.set_default_weights();
  return p;
}

SimParams SimParams::desk_defaults() {
  SimParams p;
  p.num_uavs = 3;
  p.num_users = 2;
  p.num_slots = 4;
  p.num_blocks = 3;
  p.bs_antennas = 6;
  p.uav_antennas = 2;
  p.slot_duration_s = 1.0;
  p.set_default_weights();
  return p;
}

GeometrySpec GeometrySpec::desk_defaults() {
  GeometrySpec g;
  g.ring_inner = 50.0;
  g.ring_outer = 100.0;
  return g;
}

void Scenario::validate() const {
  params.validate();
  const auto& g = geometry;
  std::vector<std::string> bad;
  if (static_cast<int>(g.user_positions.size()) != params.num_users)
    bad.push_back("user_positions count mismatch");
  if (static_cast<int>(g.uav_start_positions.size()) != params.num_uavs)
    bad.push_back("uav_start_positions count mismatch");
  for (int i = 0; i < 3; ++i)
    if (g.nav_min(i) > g.nav_max(i)) bad.push_back("nav_min exceeds nav_max");
  for (const auto& u : g.user_positions) {
    const double r = std::hypot(u.x(), u.y());
    if (r < g.ring_inner - 1e-9 || r > g.ring_outer + 1e-9)
      bad.push_back("user outside ring");
  }
  for (std::size_t i = 0; i < g.uav_start_positions.size(); ++i) {
    const Vec3& d = g.uav_start_positions[i];
    for (int c = 0; c < 3; ++c)
      if (d(c) < g.nav_min(c) - 1e-9 || d(c) > g.nav_max(c) + 1e-9)
        bad.push_back("uav start outside navigation box");
    for (std::size_t j = i + 1; j < g.uav_start_positions.size(); ++j)
      if ((d - g.uav_start_positions[j]).norm() < params.d_min - 1e-9)
        bad.push_back("uav starts closer than d_min");
  }
  if (!bad.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& m : bad) msg += "\n  - " + m;
    throw ParameterError(msg);
  }
}

Scenario generate_scenario(const SimParams& params, std::uint64_t seed,
                           const GeometrySpec& spec) {
  params.validate();
  if (spec.ring_inner < 0 || spec.ring_outer <= spec.ring_inner)
    throw ParameterError("ring radii must satisfy 0 <= ring_inner < ring_outer");
  if (spec.height_max < spec.height_min)
    throw ParameterError("height_max must be >= height_min");

  Scenario s;
  s.params = params;
  s.seed = seed;
  Geometry& g = s.geometry;
  g.ring_inner = spec.ring_inner;
  g.ring_outer = spec.ring_outer;
  g.height_min = spec.height_min;
  g.height_max = spec.height_max;
  g.bs_position = Vec3(0.0, 0.0, spec.bs_height);
  g.nav_min = Vec3(-spec.ring_outer, -spec.ring_outer, spec.height_min);
  g.nav_max = Vec3(spec.ring_outer, spec.ring_outer, spec.height_max);

  // Users and UAV starts use independent substreams so the user layout is
  // invariant under changes of L at a fixed seed (paired sweeps).
  Rng user_rng(mix64(seed, 0x75736572ull));  // "user"
  g.user_positions.resize(params.num_users);
  const double r1sq = spec.ring_inner * spec.ring_inner;
  const double r2sq = spec.ring_outer * spec.ring_outer;
  for (auto& u : g.user_positions) {
    const double r = std::sqrt(r1sq + user_rng.uniform01() * (r2sq - r1sq));
    const double th = user_rng.phase();
    u = Vec3(r * std::cos(th), r * std::sin(th), spec.user_height);
  }

  Rng uav_rng(mix64(seed, 0x75617673ull));  // "uavs"
  g.uav_start_positions.clear();
  const int max_attempts = 20000;
  int attempts = 0;
  while (static_cast<int>(g.uav_start_positions.size()) < params.num_uavs) {
    if (++attempts > max_attempts)
      throw PlacementError("could not place " + std::to_string(params.num_uavs) +
                           " UAV starts at least d_min apart after " +
                           std::to_string(max_attempts) + " attempts");
    const double r = spec.ring_outer * std::sqrt(uav_rng.uniform01());
    const double th = uav_rng.phase();
    const double z = uav_rng.uniform(spec.height_min, spec.height_max);
    const Vec3 cand(r * std::cos(th), r * std::sin(th), z);
    bool ok = true;
    for (const auto& other : g.uav_start_positions)
      ok = ok && (cand - other).norm() >= params.d_min;
    if (ok) g.uav_start_positions.push_back(cand);
  }
  return s;
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

std::string fmt_points(const std::vector<Vec3>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += " ; ";
    out += fmt(pts[i]);
  }
  return out;
}

struct Parsed {
  // section -> key -> (value, line number)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> kv;
};

Parsed parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  Parsed p;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(val);
    if (section.empty())
      throw ParseError(path + ":" + std::to_string(lineno) + ": key outside any section");
    p.kv[section][key] = {val, lineno};
  }
  return p;
}

class Reader {
 public:
  Reader(const Parsed& p, const std::string& path) : p_(p), path_(path) {}

  const std::string& raw(const std::string& sec, const std::string& key, int* line) const {
    auto s = p_.kv.find(sec);
    if (s == p_.kv.end()) throw ParseError(path_ + ": missing section [" + sec + "]");
    auto k = s->second.find(key);
    if (k == s->second.end())
      throw ParseError(path_ + ": missing key '" + key + "' in section [" + sec + "]");
    if (line) *line = k->second.second;
    return k->second.first;
  }

  double number(const std::string& sec, const std::string& key) const {
    int line = 0;
    const std::string& v = raw(sec, key, &line);
    std::size_t used = 0;
    double out = 0;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      throw ParseError(path_ + ":" + std::to_string(line) + ": '" + key + "' is not a number");
    }
    if (used != v.size())
      throw ParseError(path_ + ":" + std::to_string(line) + ": trailing junk after '" + key + "'");
    return out;
  }

  int integer(const std::string& sec, const std::string& key) const {
    const double v = number(sec, key);
    if (v != std::floor(v))
      throw ParseError(path_ + ": '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key) const {
    int line = 0;
    std::istringstream iss(raw(sec, key, &line));
    std::vector<double> out;
    double v;
    while (iss >> v) out.push_back(v);
    if (!iss.eof())
      throw ParseError(path_ + ":" + std::to_string(line) + ": bad numeric list for '" + key + "'");
    return out;
  }

  Vec3 vec3(const std::string& sec, const std::string& key) const {
    auto v = numbers(sec, key);
    if (v.size() != 3) throw ParseError(path_ + ": '" + key + "' must have 3 components");
    return Vec3(v[0], v[1], v[2]);
  }

  std::vector<Vec3> points(const std::string& sec, const std::string& key) const {
    int line = 0;
    const std::string& v = raw(sec, key, &line);
    std::vector<Vec3> out;
    std::size_t start = 0;
    while (start <= v.size()) {
      auto sep = v.find(';', start);
      std::string chunk = v.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
      std::istringstream iss(chunk);
      double x, y, z;
      if (!(iss >> x >> y >> z))
        throw ParseError(path_ + ":" + std::to_string(line) + ": bad point in '" + key + "'");
      double extra;
      if (iss >> extra)
        throw ParseError(path_ + ":" + std::to_string(line) + ": point with >3 coords in '" + key + "'");
      out.emplace_back(x, y, z);
      if (sep == std::string::npos) break;
      start = sep + 1;
    }
    return out;
  }

 private:
  const Parsed& p_;
  std::string path_;
};

}  // namespace

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  const SimParams& p = s.params;
  out << "# uavplan scenario (powers W, distances m, rates bit/s)\n";
  out << "[params]\n";
  out << "bandwidth_hz = " << fmt(p.bandwidth_hz) << "\n";
  out << "slot_duration_s = " << fmt(p.slot_duration_s) << "\n";
  out << "num_slots = " << p.num_slots << "\n";
  out << "num_blocks = " << p.num_blocks << "\n";
  out << "num_uavs = " << p.num_uavs << "\n";
  out << "num_users = " << p.num_users << "\n";
  out << "bs_antennas = " << p.bs_antennas << "\n";
  out << "uav_antennas = " << p.uav_antennas << "\n";
  out << "p_bs_max = " << fmt(p.p_bs_max) << "\n";
  out << "p_uav_max = " << fmt(p.p_uav_max) << "\n";
  out << "nav_c1 = " << fmt(p.nav_c1) << "\n";
  out << "nav_c2 = " << fmt(p.nav_c2) << "\n";
  out << "noise_psd = " << fmt(p.noise_psd) << "\n";
  out << "max_speed = " << fmt(p.max_speed) << "\n";
  out << "r_min_bps = " << fmt(p.r_min_bps) << "\n";
  out << "d_min = " << fmt(p.d_min) << "\n";
  out << "rice_factor = " << fmt(p.rice_factor) << "\n";
  out << "pathloss_exponent_data = " << fmt(p.pathloss_exponent_data) << "\n";
  out << "pathloss_exponent_fh = " << fmt(p.pathloss_exponent_fh) << "\n";
  out << "antenna_gain_data = " << fmt(p.antenna_gain_data) << "\n";
  out << "antenna_gain_fh = " << fmt(p.antenna_gain_fh) << "\n";
  out << "beta = " << fmt(p.beta) << "\n";
  out << "weights =";
  for (int i = 0; i < p.weights.size(); ++i) out << " " << fmt(p.weights(i));
  out << "\n";
  const Geometry& g = s.geometry;
  out << "[geometry]\n";
  out << "bs_position = " << fmt(g.bs_position) << "\n";
  out << "user_positions = " << fmt_points(g.user_positions) << "\n";
  out << "uav_start_positions = " << fmt_points(g.uav_start_positions) << "\n";
  out << "nav_min = " << fmt(g.nav_min) << "\n";
  out << "nav_max = " << fmt(g.nav_max) << "\n";
  out << "ring_inner = " << fmt(g.ring_inner) << "\n";
  out << "ring_outer = " << fmt(g.ring_outer) << "\n";
  out << "height_min = " << fmt(g.height_min) << "\n";
  out << "height_max = " << fmt(g.height_max) << "\n";
  out << "[seed]\n";
  out << "seed = " << s.seed << "\n";
  if (!out) throw ParseError(path + ": write failed");
}

Scenario load_scenario(const std::string& path) {
  const Parsed parsed = parse_file(path);
  const Reader r(parsed, path);
  Scenario s;
  SimParams& p = s.params;
  p.bandwidth_hz = r.number("params", "bandwidth_hz");
  p.slot_duration_s = r.number("params", "slot_duration_s");
  p.num_slots = r.integer("params", "num_slots");
  p.num_blocks = r.integer("params", "num_blocks");
  p.num_uavs = r.integer("params", "num_uavs");
  p.num_users = r.integer("params", "num_users");
  p.bs_antennas = r.integer("params", "bs_antennas");
  p.uav_antennas = r.integer("params", "uav_antennas");
  p.p_bs_max = r.number("params", "p_bs_max");
  p.p_uav_max = r.number("params", "p_uav_max");
  p.nav_c1 = r.number("params", "nav_c1");
  p.nav_c2 = r.number("params", "nav_c2");
  p.noise_psd = r.number("params", "noise_psd");
  p.max_speed = r.number("params", "max_speed");
  p.r_min_bps = r.number("params", "r_min_bps");
  p.d_min = r.number("params", "d_min");
  p.rice_factor = r.number("params", "rice_factor");
  p.pathloss_exponent_data = r.number("params", "pathloss_exponent_data");
  p.pathloss_exponent_fh = r.number("params", "pathloss_exponent_fh");
  p.antenna_gain_data = r.number("params", "antenna_gain_data");
  p.antenna_gain_fh = r.number("params", "antenna_gain_fh");
  p.beta = r.number("params", "beta");
  const auto w = r.numbers("params", "weights");
  p.weights = Eigen::Map<const VecX>(w.data(), static_cast<int>(w.size()));

  Geometry& g = s.geometry;
  g.bs_position = r.vec3("geometry", "bs_position");
  g.user_positions = r.points("geometry", "user_positions");
  g.uav_start_positions = r.points("geometry", "uav_start_positions");
  g.nav_min = r.vec3("geometry", "nav_min");
  g.nav_max = r.vec3("geometry", "nav_max");
  g.ring_inner = r.number("geometry", "ring_inner");
  g.ring_outer = r.number("geometry", "ring_outer");
  g.height_min = r.number("geometry", "height_min");
  g.height_max = r.number("geometry", "height_max");
  const double seed = r.number("seed", "seed");
  s.seed = static_cast<std::uint64_t>(seed);

  s.validate();
  return s;
}

bool operator==(const Geometry& a, const Geometry& b) {
  auto veq = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != y[i]) return false;
    return true;
  };
  return a.bs_position == b.bs_position && veq(a.user_positions, b.user_positions) &&
         veq(a.uav_start_positions, b.uav_start_positions) && a.nav_min == b.nav_min &&
         a.nav_max == b.nav_max && a.ring_inner == b.ring_inner && a.ring_outer == b.ring_outer &&
         a.height_min == b.height_min && a.height_max == b.height_max;
}

bool operator==(const SimParams& a, const SimParams& b) {
  return a.bandwidth_hz == b.bandwidth_hz && a.slot_duration_s == b.slot_duration_s &&
         a.num_slots == b.num_slots && a.num_blocks == b.num_blocks && a.num_uavs == b.num_uavs &&
         a.num_users == b.num_users && a.bs_antennas == b.bs_antennas &&
         a.uav_antennas == b.uav_antennas && a.p_bs_max == b.p_bs_max &&
         a.p_uav_max == b.p_uav_max && a.nav_c1 == b.nav_c1 && a.nav_c2 == b.nav_c2 &&
         a.noise_psd == b.noise_psd && a.max_speed == b.max_speed && a.r_min_bps == b.r_min_bps &&
         a.d_min == b.d_min && a.rice_factor == b.rice_factor &&
         a.pathloss_exponent_data == b.pathloss_exponent_data &&
         a.pathloss_exponent_fh == b.pathloss_exponent_fh &&
         a.antenna_gain_data == b.antenna_gain_data && a.antenna_gain_fh == b.antenna_gain_fh &&
         a.beta == b.beta && a.weights.size() == b.weights.size() && a.weights == b.weights;
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.params == b.params && a.geometry == b.geometry && a.seed == b.seed;
}

}  // namespace uavplan
