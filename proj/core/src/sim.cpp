#include "homodens/sim.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>

#include "homodens/error.hpp"

namespace homodens::sim {

namespace {

constexpr double kStepCountSlack = 1e-9;

std::size_t step_count(double T, double h) {
  const double ratio = T / h;
  return static_cast<std::size_t>(std::floor(ratio + kStepCountSlack * std::max(1.0, ratio)));
}

void validate(const SimConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw ConfigError("h", "time step h must be positive");
  if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) throw ConfigError("T", "horizon T must be non-negative");
  if (!(cfg.burn_in >= 0.0)) throw ConfigError("burn_in", "burn-in must be non-negative");
}

SimSummary start_summary(const SimConfig& cfg, double eps, std::size_t dim) {
  SimSummary s;
  s.seed = cfg.seed;
  s.h = cfg.h;
  s.T = cfg.T;
  s.min_state.assign(dim, std::numeric_limits<double>::infinity());
  s.max_state.assign(dim, -std::numeric_limits<double>::infinity());
  s.steps = step_count(cfg.T, cfg.h);
  s.horizon_truncated = std::abs(static_cast<double>(s.steps) * cfg.h - cfg.T) > kStepCountSlack * std::max(1.0, cfg.T);
  if (cfg.h > eps * eps / 10.0) {
    std::ostringstream os;
    os << "time step h = " << cfg.h << " exceeds eps^2/10 = " << eps * eps / 10.0
       << "; the fast drift may be under-resolved";
    s.warnings.push_back(os.str());
  }
  return s;
}

// Emits state k (time k h) to every observer when past burn-in.
template <std::size_t D>
void emit(SimSummary& s, const SimConfig& cfg, std::span<Observer* const> observers, std::size_t k,
          const std::array<double, D>& x) {
  for (std::size_t d = 0; d < D; ++d) {
    s.min_state[d] = std::min(s.min_state[d], x[d]);
    s.max_state[d] = std::max(s.max_state[d], x[d]);
  }
  const double t = static_cast<double>(k) * cfg.h;
  if (t + kStepCountSlack * cfg.h < cfg.burn_in) return;
  const double weight = k < s.steps ? cfg.h : 0.0;
  for (Observer* o : observers) o->observe(t, x, weight);
  ++s.observed;
}

template <std::size_t D>
void check_finite(const std::array<double, D>& x, const std::array<double, D>& last, std::size_t step) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DivergenceError(step, std::vector<double>(last.begin(), last.end()));
  }
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Multiscale ? "multiscale" : "homogenized"; }

Mode parse_mode(std::string_view text) {
  if (text == "multiscale") return Mode::Multiscale;
  if (text == "homogenized") return Mode::Homogenized;
  throw ConfigError("mode", "mode must be 'multiscale' or 'homogenized', got '" + std::string(text) + "'");
}

SimConfig default_config(double eps, double T, std::uint64_t seed) {
  SimConfig cfg;
  cfg.T = T;
  cfg.h = eps * eps * eps;
  cfg.seed = seed;
  return cfg;
}

SimSummary euler_maruyama(const model::ProblemSpec& spec, const SimConfig& cfg, Mode mode,
                          std::span<Observer* const> observers, const model::HomogenizedModel* homogenized) {
  validate(cfg);
  if (mode == Mode::Homogenized && homogenized == nullptr) {
    throw ConfigError("mode", "homogenized mode requires the homogenized model (K, Sigma)");
  }
  SimSummary s = start_summary(cfg, spec.eps(), 1);
  const double h = cfg.h;
  const double inv_eps = 1.0 / spec.eps();
  const double diffusion = mode == Mode::Multiscale ? spec.sigma2() : homogenized->Sigma;
  const double noise = cfg.zero_noise ? 0.0 : std::sqrt(2.0 * diffusion * h);
  const double K = mode == Mode::Homogenized ? homogenized->K : 1.0;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::array<double, 1> x{spec.x0()};
  emit(s, cfg, observers, 0, x);
  for (std::size_t k = 0; k < s.steps; ++k) {
    const std::array<double, 1> last = x;
    double drift = -K * spec.dV(x[0]);
    if (mode == Mode::Multiscale) drift -= inv_eps * spec.dp(x[0] * inv_eps);
    x[0] += drift * h;
    if (noise != 0.0) x[0] += noise * normal(rng);
    check_finite(x, last, k + 1);
    emit(s, cfg, observers, k + 1, x);
  }
  return s;
}

SimSummary euler_maruyama(const model::ProblemSpec2D& spec, const SimConfig& cfg,
                          std::span<Observer* const> observers) {
  validate(cfg);
  SimSummary s = start_summary(cfg, spec.eps(), 2);
  const double h = cfg.h;
  const double inv_eps = 1.0 / spec.eps();
  const double noise = cfg.zero_noise ? 0.0 : std::sqrt(2.0 * spec.sigma2() * h);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const model::Vec2 x0 = spec.x0();
  std::array<double, 2> x{x0[0], x0[1]};
  emit(s, cfg, observers, 0, x);
  for (std::size_t k = 0; k < s.steps; ++k) {
    const std::array<double, 2> last = x;
    const model::Vec2 gv = spec.gradV({x[0], x[1]});
    const model::Vec2 gp = spec.gradp({x[0] * inv_eps, x[1] * inv_eps});
    x[0] -= (gv[0] + inv_eps * gp[0]) * h;
    x[1] -= (gv[1] + inv_eps * gp[1]) * h;
    if (noise != 0.0) {
      x[0] += noise * normal(rng);
      x[1] += noise * normal(rng);
    }
    check_finite(x, last, k + 1);
    emit(s, cfg, observers, k + 1, x);
  }
  return s;
}

// File format.

std::string format_header(const TrajectoryHeader& header) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "#homodens traj v1 dim=%d h=%.17g seed=%llu mode=%s", header.dim, header.h,
                static_cast<unsigned long long>(header.seed), std::string(to_string(header.mode)).c_str());
  return buf;
}

TrajectoryHeader parse_header(std::string_view line) {
  constexpr std::string_view kMagic = "#homodens traj v1";
  if (line.substr(0, kMagic.size()) != kMagic) throw IoError("not a homodens trajectory file (bad magic)");
  TrajectoryHeader h;
  bool seen[4] = {false, false, false, false};
  std::istringstream is{std::string(line.substr(kMagic.size()))};
  std::string token;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw IoError("malformed trajectory header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "dim") {
        h.dim = std::stoi(value);
        seen[0] = true;
      } else if (key == "h") {
        h.h = std::stod(value);
        seen[1] = true;
      } else if (key == "seed") {
        h.seed = std::stoull(value);
        seen[2] = true;
      } else if (key == "mode") {
        h.mode = parse_mode(value);
        seen[3] = true;
      }
    } catch (const std::logic_error&) {
      throw IoError("malformed trajectory header value '" + token + "'");
    }
  }
  if (!(seen[0] && seen[1] && seen[2] && seen[3])) throw IoError("trajectory header is missing a field");
  if (h.dim != 1 && h.dim != 2) throw IoError("trajectory dimension must be 1 or 2");
  return h;
}

Encoding encoding_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".bin" || ext == ".raw" ? Encoding::Raw : Encoding::Csv;
}

namespace {

void write_le_double(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

bool read_le_double(std::ifstream& in, double& v) {
  char bytes[8];
  if (!in.read(bytes, 8)) return false;
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  v = std::bit_cast<double>(bits);
  return true;
}

std::string os_error(const std::filesystem::path& path, const char* what) {
  return std::string(what) + " '" + path.string() + "': " + std::strerror(errno);
}

}  // namespace

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path, const TrajectoryHeader& header,
                                   Encoding encoding)
    : path_(path), header_(header), encoding_(encoding) {
  out_.open(path, encoding == Encoding::Raw ? std::ios::binary | std::ios::out : std::ios::out);
  if (!out_) throw IoError(os_error(path, "cannot open trajectory for writing"));
  out_ << format_header(header) << '\n';
}

void TrajectoryWriter::observe(double t, std::span<const double> state, double /*weight*/) {
  if (encoding_ == Encoding::Raw) {
    write_le_double(out_, t);
    for (double v : state) write_le_double(out_, v);
  } else {
    int n = std::snprintf(buffer_, sizeof buffer_, "%.17g", t);
    for (double v : state) n += std::snprintf(buffer_ + n, sizeof buffer_ - static_cast<std::size_t>(n), ",%.17g", v);
    buffer_[n++] = '\n';
    out_.write(buffer_, n);
  }
  ++rows_;
  if (!out_) throw IoError(os_error(path_, "write failed for trajectory"));
}

void TrajectoryWriter::close() {
  out_.flush();
  if (!out_) throw IoError(os_error(path_, "flush failed for trajectory"));
  out_.close();
}

TrajectoryReader::TrajectoryReader(const std::filesystem::path& path, Encoding encoding)
    : path_(path), encoding_(encoding) {
  in_.open(path, encoding == Encoding::Raw ? std::ios::binary | std::ios::in : std::ios::in);
  if (!in_) throw IoError(os_error(path, "cannot open trajectory for reading"));
  std::string line;
  if (!std::getline(in_, line)) throw IoError("empty trajectory file '" + path.string() + "'");
  header_ = parse_header(line);
}

bool TrajectoryReader::next(double& t, std::span<double> state) {
  if (state.size() != static_cast<std::size_t>(header_.dim)) {
    throw ConfigError("dim", "state buffer does not match trajectory dimension");
  }
  if (encoding_ == Encoding::Raw) {
    if (!read_le_double(in_, t)) return false;
    for (double& v : state) {
      if (!read_le_double(in_, v)) throw IoError("truncated raw trajectory record in '" + path_.string() + "'");
    }
    return true;
  }
  if (!std::getline(in_, line_)) return false;
  ++line_no_;
  const char* p = line_.data();
  const char* end = p + line_.size();
  const auto parse = [&](double& out) {
    auto [ptr, ec] = std::from_chars(p, end, out);
    if (ec != std::errc()) {
      throw IoError("malformed trajectory row " + std::to_string(line_no_) + " in '" + path_.string() + "'");
    }
    p = ptr;
  };
  parse(t);
  for (double& v : state) {
    if (p == end || *p != ',') {
      throw IoError("trajectory row " + std::to_string(line_no_) + " has too few columns");
    }
    ++p;
    parse(v);
  }
  if (p != end) throw IoError("trajectory row " + std::to_string(line_no_) + " has too many columns");
  return true;
}

std::size_t replay(const std::filesystem::path& path, std::span<Observer* const> observers) {
  TrajectoryReader reader(path);
  const auto dim = static_cast<std::size_t>(reader.header().dim);
  const double h = reader.header().h;
  std::vector<double> cur(dim), nxt(dim);
  double t_cur = 0.0, t_nxt = 0.0;
  if (!reader.next(t_cur, cur)) return 0;
  std::size_t count = 0;
  for (;;) {
    const bool more = reader.next(t_nxt, nxt);
    for (Observer* o : observers) o->observe(t_cur, cur, more ? h : 0.0);
    ++count;
    if (!more) break;
    std::swap(cur, nxt);
    t_cur = t_nxt;
  }
  return count;
}

SimSummary simulate_to_file(const model::ProblemSpec& spec, const SimConfig& cfg, Mode mode,
                            const std::filesystem::path& path, const model::HomogenizedModel* homogenized) {
  TrajectoryWriter writer(path, {1, cfg.h, cfg.seed, mode}, encoding_for(path));
  Observer* obs[] = {&writer};
  SimSummary s = euler_maruyama(spec, cfg, mode, obs, homogenized);
  writer.close();
  return s;
}

SimSummary simulate_to_file(const model::ProblemSpec2D& spec, const SimConfig& cfg,
                            const std::filesystem::path& path) {
  TrajectoryWriter writer(path, {2, cfg.h, cfg.seed, Mode::Multiscale}, encoding_for(path));
  Observer* obs[] = {&writer};
  SimSummary s = euler_maruyama(spec, cfg, obs);
  writer.close();
  return s;
}

}  // namespace homodens::sim
