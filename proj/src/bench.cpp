#include "dirkde/bench.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/risk.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace dirkde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kKeptFailureMessages = 5;

bool selector_applies(SelectorId id, int q)
{
  return q == 1 || (id != SelectorId::tay && id != SelectorId::oli);
}

std::vector<double> truth_at_nodes(const DensityModel& truth, const QuadratureRule& rule)
{
  std::vector<double> f(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    f[i] = truth.density(rule.nodes.row(i));
  return f;
}

PointSet draw_replicate(const DensityModel& truth, std::uint64_t seed, std::size_t n)
{
  Rng rng(seed);
  return truth.sample(n, rng);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt17(double v)
{
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_fields(const std::string& line, std::vector<double>& out)
{
  out.clear();
  std::size_t pos = 0;
  for (;;) {
    auto comma = line.find(',', pos);
    std::string field = trim(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      return false;
    out.push_back(v);
    if (comma == std::string::npos)
      return true;
    pos = comma + 1;
  }
}

HMiseResult minimize_mean_ise(const std::vector<PointSet>& samples,
                              std::span<const double> truth,
                              const QuadratureRule& rule)
{
  auto ises = [&](double h) {
    std::vector<double> v(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
      v[r] = ise(KdeModel(samples[r], h), truth, rule);
    return v;
  };
  auto res = minimize_risk_widening([&](double h) { return mean_sd(ises(h)).mean; });
  HMiseResult out;
  out.h = res.h;
  out.value = res.value;
  out.sd = mean_sd(ises(res.h)).sd;
  out.boundary = res.on_boundary();
  return out;
}

} // namespace

void BenchConfig::validate() const
{
  if (dims.empty() || sample_sizes.empty() || models.empty() || selectors.empty())
    throw DomainError("bench config needs at least one dim, sample size, model and selector");
  if (replicates < 1)
    throw DomainError("bench config: replicates must be >= 1");
  const int n_models = static_cast<int>(scenario_catalog().size());
  for (int m : models)
    if (m < 1 || m > n_models)
      throw DomainError("bench config: unknown model M" + std::to_string(m));
  for (int q : dims)
    if (q < 1)
      throw DomainError("bench config: dims must be >= 1");
  for (auto n : sample_sizes)
    if (n < 2)
      throw DomainError("bench config: sample sizes must be >= 2");
}

std::uint64_t replicate_seed(std::uint64_t master, int model, int q, std::size_t n, int r)
{
  return derive_seed(master, {static_cast<std::uint64_t>(model), static_cast<std::uint64_t>(q),
                              static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

std::uint64_t sample_hash(const PointSet& sample)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : sample.values()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double ise(const KdeModel& estimate, std::span<const double> truth, const QuadratureRule& rule)
{
  if (estimate.dim() != rule.q)
    throw DomainError("ise: estimate and rule dimensions differ");
  if (truth.size() != rule.size())
    throw DomainError("ise: truth values do not match the rule nodes");
  auto fh = estimate.eval_many(rule.nodes);
  for (std::size_t i = 0; i < fh.size(); ++i) {
    double d = fh[i] - truth[i];
    fh[i] = d * d;
  }
  return integrate_values(rule, fh);
}

double ise(const KdeModel& estimate, const DensityModel& truth, const QuadratureRule& rule)
{
  if (truth.dim() != rule.q)
    throw DomainError("ise: truth and rule dimensions differ");
  return ise(estimate, truth_at_nodes(truth, rule), rule);
}

double pairwise_sum(std::span<const double> v)
{
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v)
      s += x;
    return s;
  }
  auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanSd mean_sd(std::span<const double> v)
{
  MeanSd out;
  if (v.empty())
    return {kNaN, kNaN};
  out.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() > 1) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      d[i] = (v[i] - out.mean) * (v[i] - out.mean);
    out.sd = std::sqrt(pairwise_sum(d) / static_cast<double>(v.size() - 1));
  }
  return out;
}

double CellResult::standard_error() const
{
  auto ok = ise_values.size();
  return ok > 0 ? sd_ise / std::sqrt(static_cast<double>(ok)) : kNaN;
}

ModelBlock run_block(int model,
                     int q,
                     std::size_t n,
                     const std::vector<SelectorId>& selectors,
                     int replicates,
                     std::uint64_t seed,
                     std::uint64_t mc_seed,
                     bool with_empirical_h_mise)
{
  if (replicates < 1)
    throw DomainError("run_block: replicates must be >= 1");
  const DensityModel truth = scenario(model, q);
  const auto& rule = cached_protocol_rule(q, mc_seed);
  const auto f = truth_at_nodes(truth, rule);

  ModelBlock block;
  block.model = model;
  block.q = q;
  block.n = n;
  std::vector<std::vector<double>> hs(selectors.size());
  for (auto id : selectors) {
    CellResult c;
    c.model = model;
    c.q = q;
    c.n = n;
    c.selector = id;
    c.applicable = selector_applies(id, q);
    block.cells.push_back(c);
  }

  std::vector<PointSet> kept;
  for (int r = 0; r < replicates; ++r) {
    const auto rs = replicate_seed(seed, model, q, n, r);
    PointSet sample = draw_replicate(truth, rs, n);
    block.sample_hashes.push_back(sample_hash(sample));
    SelectionContext ctx(sample, derive_seed(rs, {1}), mc_seed);
    for (std::size_t k = 0; k < selectors.size(); ++k) {
      auto& c = block.cells[k];
      if (!c.applicable)
        continue;
      auto t0 = std::chrono::steady_clock::now();
      ++c.replicates;
      c.sample_hashes.push_back(block.sample_hashes.back());
      try {
        auto rep = select_bandwidth(selectors[k], ctx);
        c.ise_values.push_back(ise(KdeModel(sample, rep.h), f, rule));
        hs[k].push_back(rep.h);
        if (rep.on_boundary())
          ++c.boundary_hits;
      } catch (const std::exception& e) {
        ++c.failures;
        if (c.failure_messages.size() < kKeptFailureMessages)
          c.failure_messages.push_back("replicate " + std::to_string(r) + ": " + e.what());
      }
      c.seconds += seconds_since(t0);
    }
    if (with_empirical_h_mise)
      kept.push_back(std::move(sample));
  }

  for (std::size_t k = 0; k < selectors.size(); ++k) {
    auto& c = block.cells[k];
    if (!c.applicable || c.ise_values.empty()) {
      c.mean_ise = c.sd_ise = c.mean_h = kNaN;
      continue;
    }
    auto ms = mean_sd(c.ise_values);
    c.mean_ise = ms.mean;
    c.sd_ise = ms.sd;
    c.mean_h = mean_sd(hs[k]).mean;
  }

  if (const auto* mix = truth.as_vm_mixture()) {
    auto curve = exact_mise_curve(*mix, static_cast<double>(n), rule);
    block.exact_h_mise = HMiseResult{curve.h_min, curve.min_value, 0.0, curve.boundary};
  }
  if (with_empirical_h_mise)
    block.empirical_h_mise = minimize_mean_ise(kept, f, rule);
  return block;
}

CellResult run_cell(int model,
                    int q,
                    std::size_t n,
                    SelectorId selector,
                    int replicates,
                    std::uint64_t seed,
                    std::uint64_t mc_seed)
{
  if (!selector_applies(selector, q))
    throw UnsupportedError("selector " + to_string(selector) + " is defined for q = 1 only");
  return run_block(model, q, n, {selector}, replicates, seed, mc_seed).cells.front();
}

HMiseResult empirical_h_mise(int model,
                             int q,
                             std::size_t n,
                             int replicates,
                             std::uint64_t seed,
                             std::uint64_t mc_seed)
{
  if (replicates < 1)
    throw DomainError("empirical_h_mise: replicates must be >= 1");
  const DensityModel truth = scenario(model, q);
  const auto& rule = cached_protocol_rule(q, mc_seed);
  std::vector<PointSet> samples;
  for (int r = 0; r < replicates; ++r)
    samples.push_back(draw_replicate(truth, replicate_seed(seed, model, q, n, r), n));
  return minimize_mean_ise(samples, truth_at_nodes(truth, rule), rule);
}

MiseCurve empirical_mise_curve(int model,
                               int q,
                               std::size_t n,
                               int replicates,
                               std::uint64_t seed,
                               std::uint64_t mc_seed,
                               double lo,
                               double hi,
                               int points)
{
  if (replicates < 1)
    throw DomainError("empirical_mise_curve: replicates must be >= 1");
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw DomainError("empirical_mise_curve: need 0 < lo < hi and points >= 2");
  const DensityModel truth = scenario(model, q);
  const auto& rule = cached_protocol_rule(q, mc_seed);
  const auto f = truth_at_nodes(truth, rule);
  std::vector<PointSet> samples;
  for (int r = 0; r < replicates; ++r)
    samples.push_back(draw_replicate(truth, replicate_seed(seed, model, q, n, r), n));
  MiseCurve c;
  c.n = static_cast<double>(n);
  c.q = q;
  c.source = CurveSource::empirical;
  std::size_t best = 0;
  for (int i = 0; i < points; ++i) {
    double h = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    std::vector<double> v(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
      v[r] = ise(KdeModel(samples[r], h), f, rule);
    c.h.push_back(h);
    c.mise.push_back(mean_sd(v).mean);
    if (c.mise.back() < c.mise[best])
      best = c.mise.size() - 1;
  }
  c.h_min = c.h[best];
  c.min_value = c.mise[best];
  c.boundary = best == 0 || best + 1 == c.h.size();
  return c;
}

Ranking rank_selectors(const std::vector<std::vector<double>>& mise,
                       const std::vector<std::string>& names)
{
  Ranking out;
  std::size_t cols = 0;
  for (const auto& row : mise)
    cols = std::max(cols, row.size());
  out.scores.assign(cols, 0.0);
  auto name = [&](std::size_t k) { return k < names.size() ? names[k] : std::to_string(k); };
  for (std::size_t i = 0; i < mise.size(); ++i) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < mise[i].size(); ++k)
      if (std::isfinite(mise[i][k]))
        idx.push_back(k);
    if (idx.empty())
      continue;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return mise[i][a] < mise[i][b]; });
    const double m = static_cast<double>(idx.size());
    const double best = mise[i][idx.front()];
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      std::size_t k = idx[pos];
      double ratio = mise[i][k] > 0.0 ? best / mise[i][k] : 1.0;
      out.scores[k] += (m - static_cast<double>(pos)) / m * ratio;
      if (pos > 0 && mise[i][k] == mise[i][idx[pos - 1]])
        out.ties.push_back("row " + std::to_string(i) + ": " + name(idx[pos - 1]) + " ranked above " +
                           name(k) + " (equal MISE)");
    }
  }
  return out;
}

bool BenchResult::ok() const
{
  for (const auto& b : blocks)
    for (const auto& c : b.cells)
      if (c.applicable && c.flagged())
        return false;
  return true;
}

Ranking BenchResult::ranking(int q, std::size_t n) const
{
  std::vector<std::vector<double>> m;
  std::vector<std::string> names;
  for (auto id : config.selectors)
    names.push_back(to_string(id));
  for (const auto& b : blocks) {
    if (b.q != q || b.n != n)
      continue;
    std::vector<double> row;
    for (const auto& c : b.cells)
      row.push_back(c.applicable ? c.mean_ise : kNaN);
    m.push_back(row);
  }
  auto r = rank_selectors(m, names);
  r.scores.resize(config.selectors.size(), 0.0);
  return r;
}

BenchResult run_bench(const BenchConfig& config)
{
  config.validate();
  auto t0 = std::chrono::steady_clock::now();
  BenchResult out;
  out.config = config;
  for (int q : config.dims)
    for (auto n : config.sample_sizes)
      for (int model : config.models)
        out.blocks.push_back(run_block(model, q, n, config.selectors, config.replicates,
                                       config.seed, config.mc_seed, config.empirical_h_mise));
  out.seconds = seconds_since(t0);
  return out;
}

void write_table_csv(const BenchResult& result, int q, std::size_t n, std::ostream& out)
{
  out << "model,exact_h_mise_x100,empirical_h_mise_x100,empirical_h_mise_sd_x100";
  for (auto id : result.config.selectors) {
    auto s = to_string(id);
    out << ',' << s << "_x100," << s << "_sd_x100," << s << "_failures";
  }
  out << '\n';
  for (const auto& b : result.blocks) {
    if (b.q != q || b.n != n)
      continue;
    out << 'M' << b.model << ',';
    out << (b.exact_h_mise ? fmt17(100 * b.exact_h_mise->value) : "") << ',';
    out << (b.empirical_h_mise ? fmt17(100 * b.empirical_h_mise->value) : "") << ',';
    out << (b.empirical_h_mise ? fmt17(100 * b.empirical_h_mise->sd) : "");
    for (const auto& c : b.cells) {
      if (!c.applicable)
        out << ",,,";
      else
        out << ',' << fmt17(100 * c.mean_ise) << ',' << fmt17(100 * c.sd_ise) << ',' << c.failures;
    }
    out << '\n';
  }
}

void write_cells_csv(const BenchResult& result, std::ostream& out)
{
  out << "model,q,n,selector,replicates,failures,mean_ise,sd_ise,mean_h,boundary_hits,seconds\n";
  for (const auto& b : result.blocks)
    for (const auto& c : b.cells) {
      if (!c.applicable)
        continue;
      out << 'M' << c.model << ',' << c.q << ',' << c.n << ',' << to_string(c.selector) << ','
          << c.replicates << ',' << c.failures << ',' << fmt17(c.mean_ise) << ','
          << fmt17(c.sd_ise) << ',' << fmt17(c.mean_h) << ',' << c.boundary_hits << ','
          << fmt17(c.seconds) << '\n';
    }
}

void write_summary_json(const BenchResult& result, std::ostream& out)
{
  using nlohmann::json;
  const auto& cfg = result.config;
  json j;
  std::vector<std::string> models, selectors;
  for (int m : cfg.models)
    models.push_back("M" + std::to_string(m));
  for (auto s : cfg.selectors)
    selectors.push_back(to_string(s));
  j["config"] = {{"dims", cfg.dims},
                 {"sample_sizes", cfg.sample_sizes},
                 {"models", models},
                 {"selectors", selectors},
                 {"replicates", cfg.replicates},
                 {"seed", cfg.seed},
                 {"mc_seed", cfg.mc_seed},
                 {"empirical_h_mise", cfg.empirical_h_mise}};
  json blocks = json::array();
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto hmise = [&](const std::optional<HMiseResult>& r) {
    if (!r)
      return json(nullptr);
    return json{{"h", r->h}, {"mise", r->value}, {"sd", r->sd}, {"boundary", r->boundary}};
  };
  for (const auto& b : result.blocks) {
    json cells = json::array();
    for (const auto& c : b.cells) {
      if (!c.applicable)
        continue;
      cells.push_back({{"selector", to_string(c.selector)},
                       {"replicates", c.replicates},
                       {"failures", c.failures},
                       {"flagged", c.flagged()},
                       {"failure_messages", c.failure_messages},
                       {"mean_ise", num(c.mean_ise)},
                       {"sd_ise", num(c.sd_ise)},
                       {"mean_h", num(c.mean_h)},
                       {"boundary_hits", c.boundary_hits},
                       {"seconds", c.seconds}});
    }
    blocks.push_back({{"model", "M" + std::to_string(b.model)},
                      {"q", b.q},
                      {"n", b.n},
                      {"exact_h_mise", hmise(b.exact_h_mise)},
                      {"empirical_h_mise", hmise(b.empirical_h_mise)},
                      {"sample_hashes", b.sample_hashes},
                      {"cells", cells}});
  }
  j["blocks"] = blocks;
  json rankings = json::array();
  for (int q : cfg.dims)
    for (auto n : cfg.sample_sizes) {
      auto r = result.ranking(q, n);
      json scores = json::object();
      for (std::size_t k = 0; k < selectors.size(); ++k)
        if (selector_applies(cfg.selectors[k], q))
          scores[selectors[k]] = r.scores[k];
      rankings.push_back({{"q", q}, {"n", n}, {"scores", scores}, {"ties", r.ties}});
    }
  j["rankings"] = rankings;
  j["ok"] = result.ok();
  j["seconds"] = result.seconds;
  out << j.dump(2) << '\n';
}

void write_bench_outputs(const BenchResult& result)
{
  namespace fs = std::filesystem;
  const auto& cfg = result.config;
  if (cfg.out_dir.empty())
    throw DomainError("bench: no output directory");
  fs::create_directories(cfg.out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.out_dir) / name);
    if (!f)
      throw std::runtime_error("cannot write " + (fs::path(cfg.out_dir) / name).string());
    return f;
  };
  for (int q : cfg.dims)
    for (auto n : cfg.sample_sizes) {
      auto f = open("table_q" + std::to_string(q) + "_n" + std::to_string(n) + ".csv");
      write_table_csv(result, q, n, f);
    }
  auto cells = open("cells.csv");
  write_cells_csv(result, cells);
  auto summary = open("summary.json");
  write_summary_json(result, summary);
}

void print_table(const BenchResult& result, int q, std::size_t n, std::ostream& out)
{
  const auto& sel = result.config.selectors;
  out << "q = " << q << ", n = " << n << ", " << result.config.replicates
      << " replicates, MISE x 100 (sd)\n";
  out << std::left << std::setw(6) << "model" << std::setw(10) << "h_MISE";
  for (auto id : sel)
    out << std::setw(20) << to_string(id);
  out << '\n';
  auto cell = [](double v, double sd) {
    std::ostringstream s;
    s << std::setprecision(4) << 100 * v << " (" << std::setprecision(4) << 100 * sd << ")";
    return s.str();
  };
  for (const auto& b : result.blocks) {
    if (b.q != q || b.n != n)
      continue;
    std::ostringstream hm;
    if (b.exact_h_mise)
      hm << std::setprecision(4) << 100 * b.exact_h_mise->value;
    else if (b.empirical_h_mise)
      hm << std::setprecision(4) << 100 * b.empirical_h_mise->value;
    else
      hm << "-";
    out << std::setw(6) << ("M" + std::to_string(b.model)) << std::setw(10) << hm.str();
    for (const auto& c : b.cells) {
      std::string s = !c.applicable ? "-" : c.ise_values.empty() ? "failed" : cell(c.mean_ise, c.sd_ise);
      if (c.applicable && c.failures > 0)
        s += " [" + std::to_string(c.failures) + " failed]";
      out << std::setw(20) << s;
    }
    out << '\n';
  }
  auto r = result.ranking(q, n);
  out << "ranking score:";
  for (std::size_t k = 0; k < sel.size(); ++k)
    if (selector_applies(sel[k], q))
      out << ' ' << to_string(sel[k]) << '=' << std::setprecision(4) << r.scores[k];
  out << '\n';
  for (const auto& t : r.ties)
    out << "tie: " << t << '\n';
}

CsvFormat parse_csv_format(const std::string& name)
{
  if (name == "unit-vectors")
    return CsvFormat::unit_vectors;
  if (name == "angles-1d")
    return CsvFormat::angles_1d;
  if (name == "angles-2d")
    return CsvFormat::angles_2d;
  throw DomainError("unknown CSV format '" + name + "' (expected unit-vectors, angles-1d or angles-2d)");
}

PointSet ingest_csv(std::istream& in, CsvFormat format)
{
  PointSet out;
  std::string line;
  std::vector<double> v;
  int row = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++row;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    if (!parse_fields(t, v)) {
      bool alpha = std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c); });
      if (!seen_data && alpha && out.empty()) {
        seen_data = true; // header
        continue;
      }
      throw ParseError("row " + std::to_string(row) + ": cannot parse '" + t + "'");
    }
    seen_data = true;
    UnitVector x;
    try {
      switch (format) {
        case CsvFormat::unit_vectors:
          if (v.size() < 2)
            throw ParseError("row " + std::to_string(row) + ": unit vectors need at least 2 coordinates");
          x = UnitVector(v);
          break;
        case CsvFormat::angles_1d:
          if (v.size() != 1)
            throw ParseError("row " + std::to_string(row) + ": angles-1d expects one field");
          x = rho1(v[0]);
          break;
        case CsvFormat::angles_2d:
          if (v.size() != 2)
            throw ParseError("row " + std::to_string(row) + ": angles-2d expects two fields");
          x = rho2(v[0], v[1]);
          break;
      }
    } catch (const DomainError& e) {
      throw ParseError("row " + std::to_string(row) + ": " + e.what());
    }
    if (out.dim() < 0)
      out = PointSet(x.dim());
    else if (out.dim() != x.dim())
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(out.dim() + 1) +
                       " coordinates, got " + std::to_string(x.size()));
    out.push_back(x);
  }
  if (out.empty())
    throw ParseError("no data rows");
  return out;
}

PointSet ingest_csv(const std::string& path, CsvFormat format)
{
  std::ifstream f(path);
  if (!f)
    throw ParseError("cannot open " + path);
  return ingest_csv(f, format);
}

void write_points_csv(const PointSet& points, std::ostream& out)
{
  out << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto x = points.row(i);
    for (std::size_t k = 0; k < x.size(); ++k)
      out << (k ? "," : "") << x[k];
    out << '\n';
  }
}

} // namespace dirkde
