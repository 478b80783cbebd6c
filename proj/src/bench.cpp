#include "ksim/bench.hpp"
#include "ksim/normalize.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace ksim::bench {

using nlohmann::json;

namespace {

constexpr char const *kMetricNames[] = {"mse", "psnr", "ssim"};

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn &&fn)
{
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) { failure = std::current_exception(); }
        }
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  if (failure) { std::rethrow_exception(failure); }
}

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json config_json(BenchConfig const &c)
{
  json j;
  if (c.corpus.directory) {
    j["corpus"] = c.corpus.directory->generic_string();
  } else {
    j["corpus"] = {{"phantom", std::string(imgio::to_string(c.corpus.phantom))},
                   {"size", c.corpus.phantom_size},
                   {"count", c.corpus.phantom_count}};
  }
  std::vector<std::string> patterns;
  for (auto p : c.patterns) {
    patterns.emplace_back(masks::to_string(p));
  }
  j["patterns"] = patterns;
  j["accelerations"] = c.accelerations;
  j["downscale"] = c.downscale;
  j["path"] = std::string(pipeline::to_string(c.path));
  j["recon"] = std::string(pipeline::to_string(c.recon));
  j["downscale_method"] = std::string(pipeline::to_string(c.downscale_method));
  j["normalization"] = std::string(to_string(c.normalization));
  j["ssim_mode"] = std::string(metrics::to_string(c.ssim_mode));
  j["seed"] = c.seed;
  j["per_slice_seed"] = c.per_slice_seed;
  j["center_fraction"] = c.center_fraction;
  j["angle_offset"] = c.angle_offset;
  j["arm_count"] = c.arm_count;
  return j;
}

struct Prepared
{
  std::vector<NamedSlice> slices;
  std::vector<std::string> skipped;
  std::vector<bool> fallback;
};

Prepared prepare(BenchConfig const &config, Corpus const &corpus)
{
  Prepared out;
  out.skipped = corpus.skipped;
  for (auto const &item : corpus.slices) {
    try {
      validate(item.slice);
      if (item.slice.height % config.downscale || item.slice.width % config.downscale) {
        throw Error(errc::DimensionMismatch, "size not divisible by downscale " + std::to_string(config.downscale));
      }
      Slice s = item.slice;
      bool fell_back = false;
      switch (config.normalization) {
      case Normalization::none: break;
      case Normalization::percentile: s = normalize::normalize_percentile(s); break;
      case Normalization::histogram: {
        auto r = normalize::normalize_histogram(s);
        s = std::move(r.slice);
        fell_back = r.fallback;
        break;
      }
      }
      out.slices.push_back({item.name, std::move(s)});
      out.fallback.push_back(fell_back);
    } catch (Error const &e) {
      out.skipped.push_back(item.name + ": " + e.kind());
    }
  }
  return out;
}

struct Cell
{
  masks::Pattern pattern;
  unsigned accel; // undersampling factor; 1 for lowres
  bool has_mask;
};

std::string render_csv(BenchConfig const &config, BenchResult const &r)
{
  std::ostringstream out;
  out << "# ksim-bench version=" << kToolkitVersion << "\n";
  out << "# config=" << config_echo(config) << "\n";
  out << "# slices_read=" << r.slices_read << " slices_skipped=" << r.slices_skipped << "\n";
  for (auto const &s : r.skipped) {
    out << "# skipped " << s << "\n";
  }
  for (auto const &h : r.mask_hashes) {
    out << "# mask " << h << "\n";
  }
  for (auto const &n : r.notes) {
    out << "# note " << n << "\n";
  }
  out << kCsvHeader << "\n";
  for (auto const &row : r.rows) {
    out << row.pattern << ',' << metrics::format_exact(row.fraction) << ',' << row.total_acceleration << ','
        << row.path << ',' << row.metric << ',' << metrics::format_exact(row.mean) << ','
        << metrics::format_exact(row.std) << ',' << row.n << "\n";
  }
  return out.str();
}

template <typename T>
T get_enum(json const &j, char const *key, T fallback, T (*parse)(std::string_view))
{
  if (!j.contains(key)) { return fallback; }
  return parse(j.at(key).get<std::string>());
}

} // namespace

std::string_view to_string(Normalization n)
{
  switch (n) {
  case Normalization::none: return "none";
  case Normalization::percentile: return "percentile";
  case Normalization::histogram: return "histogram";
  }
  return "?";
}

Normalization parse_normalization(std::string_view s)
{
  if (s == "none") { return Normalization::none; }
  if (s == "percentile") { return Normalization::percentile; }
  if (s == "histogram") { return Normalization::histogram; }
  throw Error(errc::InvalidArgument, "unknown normalization '" + std::string(s) + "'");
}

std::uint64_t fnv1a64(std::vector<std::uint8_t> const &bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BenchConfig parse_config(std::string const &text)
{
  BenchConfig c;
  try {
    json const j = json::parse(text);
    static std::vector<std::string> const known{
      "corpus", "patterns", "accelerations", "downscale", "path", "recon", "downscale_method", "normalization",
      "ssim_mode", "seed", "per_slice_seed", "center_fraction", "angle_offset", "arm_count", "output", "threads"};
    for (auto const &[key, _] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw Error(errc::InvalidArgument, "unknown config key '" + key + "'");
      }
    }
    if (!j.contains("corpus")) { throw Error(errc::InvalidArgument, "config needs a corpus"); }
    auto const &corpus = j.at("corpus");
    if (corpus.is_string()) {
      c.corpus.directory = corpus.get<std::string>();
    } else {
      c.corpus.phantom = imgio::parse_phantom(corpus.at("phantom").get<std::string>());
      c.corpus.phantom_size = corpus.value("size", std::size_t{320});
      c.corpus.phantom_count = corpus.value("count", std::size_t{1});
    }
    if (j.contains("patterns")) {
      c.patterns.clear();
      for (auto const &p : j.at("patterns")) {
        c.patterns.push_back(masks::parse_pattern(p.get<std::string>()));
      }
    }
    if (j.contains("accelerations")) { c.accelerations = j.at("accelerations").get<std::vector<unsigned>>(); }
    c.downscale = j.value("downscale", 1u);
    c.path = get_enum(j, "path", c.path, pipeline::parse_path);
    c.recon = get_enum(j, "recon", c.recon, pipeline::parse_recon);
    c.downscale_method = get_enum(j, "downscale_method", c.downscale_method, pipeline::parse_downscale_method);
    c.normalization = get_enum(j, "normalization", c.normalization, parse_normalization);
    c.ssim_mode = get_enum(j, "ssim_mode", c.ssim_mode, metrics::parse_ssim_mode);
    c.seed = j.value("seed", std::uint64_t{0});
    c.per_slice_seed = j.value("per_slice_seed", false);
    c.center_fraction = j.value("center_fraction", masks::kDefaultCenterFraction);
    c.angle_offset = j.value("angle_offset", 0.0);
    c.arm_count = j.value("arm_count", std::size_t{1});
    if (j.contains("output")) { c.output = j.at("output").get<std::string>(); }
    c.threads = j.value("threads", 0u);
  } catch (json::parse_error const &e) {
    throw Error(errc::FormatError, std::string("bench config is not valid JSON: ") + e.what());
  } catch (json::exception const &e) {
    throw Error(errc::InvalidArgument, std::string("malformed bench config: ") + e.what());
  }

  static std::vector<unsigned> const allowed{1, 2, 4, 8, 16, 32, 64};
  for (auto a : c.accelerations) {
    if (std::find(allowed.begin(), allowed.end(), a) == allowed.end()) {
      throw Error(errc::InvalidArgument, "acceleration " + std::to_string(a) + " not in {1,2,4,8,16,32,64}");
    }
  }
  if (c.downscale != 1 && c.downscale != 2 && c.downscale != 4) {
    throw Error(errc::InvalidArgument, "downscale must be 1, 2 or 4");
  }
  if (c.path == pipeline::Path::undersample && c.downscale != 1) {
    throw Error(errc::InvalidArgument, "undersample path requires downscale 1");
  }
  if (c.accelerations.empty() && c.path != pipeline::Path::lowres) {
    throw Error(errc::InvalidArgument, "no accelerations configured");
  }
  return c;
}

BenchConfig load_config(std::filesystem::path const &path)
{
  auto const bytes = imgio::read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::string config_echo(BenchConfig const &config) { return config_json(config).dump(); }

Corpus load_corpus(CorpusSpec const &spec)
{
  Corpus corpus;
  if (!spec.directory) {
    for (std::size_t i = 0; i < spec.phantom_count; ++i) {
      corpus.slices.push_back(
        {std::string(imgio::to_string(spec.phantom)) + "_" + std::to_string(i), imgio::make_phantom(spec.phantom, spec.phantom_size)});
    }
    return corpus;
  }
  if (!std::filesystem::is_directory(*spec.directory)) {
    throw Error(errc::IoError, "corpus directory " + spec.directory->string() + " not found");
  }
  std::vector<std::filesystem::path> files;
  for (auto const &entry : std::filesystem::directory_iterator(*spec.directory)) {
    auto const ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ksim")) { files.push_back(entry.path()); }
  }
  std::sort(files.begin(), files.end());
  for (auto const &f : files) {
    try {
      corpus.slices.push_back({f.filename().string(), imgio::read_slice(f)});
    } catch (Error const &e) {
      corpus.skipped.push_back(f.filename().string() + ": " + e.kind());
    }
  }
  return corpus;
}

unsigned resolve_threads(unsigned requested)
{
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (char const *env = std::getenv("KSIM_THREADS")) {
    char *end = nullptr;
    unsigned long const cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) { n = std::min<unsigned>(n, unsigned(cap)); }
  }
  return std::max(1u, n);
}

BenchResult run_bench(BenchConfig const &config, Corpus const &corpus)
{
  if (corpus.size() == 0) { throw Error(errc::EmptyCorpus, "corpus is empty"); }
  auto const prepared = prepare(config, corpus);
  BenchResult result;
  result.slices_read = prepared.slices.size();
  result.slices_skipped = prepared.skipped.size();
  result.skipped = prepared.skipped;
  if (config.normalization == Normalization::histogram) { result.histogram_fallback = prepared.fallback; }
  if (prepared.slices.empty()) {
    throw Error(errc::EmptyCorpus, "all " + std::to_string(corpus.size()) + " corpus slices were skipped");
  }

  std::vector<Cell> cells;
  if (config.path == pipeline::Path::lowres) {
    cells.push_back({masks::Pattern::unknown, 1, false});
  } else {
    for (auto p : config.patterns) {
      for (auto a : config.accelerations) {
        cells.push_back({p, a, true});
      }
    }
  }

  unsigned const threads = resolve_threads(config.threads);
  masks::MaskOptions base_opts{config.seed, config.center_fraction, config.angle_offset, config.arm_count};
  metrics::SsimParams ssim_params;
  ssim_params.mode = config.ssim_mode;

  for (auto const &cell : cells) {
    double const fraction = masks::accel_to_fraction(cell.accel);
    bool const per_slice = cell.has_mask && config.per_slice_seed && cell.pattern == masks::Pattern::fastmri;
    std::string const pattern_name = cell.has_mask ? std::string(masks::to_string(cell.pattern)) : "none";

    // One mask per distinct low-resolution geometry, shared by the corpus.
    std::map<std::pair<std::size_t, std::size_t>, masks::Mask> shared;
    bool excluded = false;
    if (cell.has_mask && !per_slice) {
      for (auto const &item : prepared.slices) {
        auto const key = std::make_pair(item.slice.height / config.downscale, item.slice.width / config.downscale);
        if (shared.count(key)) { continue; }
        try {
          shared.emplace(key, masks::make_mask(cell.pattern, key.first, key.second, fraction, base_opts));
        } catch (Error const &e) {
          if (e.kind() != errc::FractionBelowCenter) { throw; }
          result.notes.push_back("excluded " + pattern_name + " x" + std::to_string(cell.accel) + ": " + e.kind());
          excluded = true;
          break;
        }
        auto const &m = shared.at(key);
        result.mask_hashes.push_back(pattern_name + " " + metrics::format_exact(fraction) + " " +
                                     std::to_string(key.first) + "x" + std::to_string(key.second) + " fnv1a64=" +
                                     hex64(fnv1a64(masks::encode_pbm(m))));
      }
    }
    if (excluded) { continue; }
    if (per_slice) {
      result.notes.push_back("per-slice fastmri masks for x" + std::to_string(cell.accel) + " (seed + slice index)");
    }

    std::size_t const n = prepared.slices.size();
    std::vector<metrics::IQReport> reports(n);
    std::vector<char> cell_excluded(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
      Slice const &src = prepared.slices[i].slice;
      pipeline::DegradeSpec spec;
      spec.path = config.path;
      spec.downscale = config.downscale;
      spec.recon = config.recon;
      spec.downscale_method = config.downscale_method;
      if (cell.has_mask) {
        std::size_t const h = src.height / config.downscale, w = src.width / config.downscale;
        if (per_slice) {
          auto opts = base_opts;
          opts.seed = config.seed + i;
          try {
            spec.mask = masks::make_mask(cell.pattern, h, w, fraction, opts);
          } catch (Error const &e) {
            if (e.kind() != errc::FractionBelowCenter) { throw; }
            cell_excluded[i] = 1;
            return;
          }
        } else {
          spec.mask = shared.at({h, w});
        }
      }
      Slice const out = pipeline::degrade(src, spec);
      // Compare at the output resolution.
      Slice reference;
      if (out.height == src.height && out.width == src.width) {
        reference = src;
      } else if (config.downscale_method == pipeline::DownscaleMethod::bicubic) {
        reference = pipeline::bicubic_resample(src, out.height, out.width);
      } else {
        reference = pipeline::kspace_downscale(src, config.downscale);
      }
      reports[i] = metrics::evaluate(reference, out, ssim_params);
    });
    if (std::any_of(cell_excluded.begin(), cell_excluded.end(), [](char c) { return c != 0; })) {
      result.notes.push_back("excluded " + pattern_name + " x" + std::to_string(cell.accel) + ": " +
                             errc::FractionBelowCenter);
      continue;
    }

    unsigned const total = masks::total_accel(config.downscale, cell.accel);
    std::string const path_name(pipeline::to_string(config.path));
    std::vector<double> values(n);
    for (int m = 0; m < 3; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = m == 0 ? reports[i].mse : (m == 1 ? reports[i].psnr : reports[i].ssim);
      }
      auto const agg = metrics::aggregate(values);
      result.rows.push_back({pattern_name, fraction, total, path_name, kMetricNames[m], agg.mean, agg.std, agg.n});
    }
  }

  auto metric_rank = [](std::string const &m) {
    return std::find(std::begin(kMetricNames), std::end(kMetricNames), m) - std::begin(kMetricNames);
  };
  std::stable_sort(result.rows.begin(), result.rows.end(), [&](BenchRow const &a, BenchRow const &b) {
    return std::make_tuple(a.pattern, -a.fraction, metric_rank(a.metric)) <
           std::make_tuple(b.pattern, -b.fraction, metric_rank(b.metric));
  });
  result.csv = render_csv(config, result);
  return result;
}

BenchResult run_bench(BenchConfig const &config)
{
  auto const corpus = load_corpus(config.corpus);
  auto result = run_bench(config, corpus);
  if (config.output) {
    imgio::write_file(*config.output, std::vector<std::uint8_t>(result.csv.begin(), result.csv.end()));
  }
  return result;
}

std::vector<NormalizationArm> compare_normalizations(BenchConfig const &config, Corpus const &corpus,
                                                     std::vector<Normalization> const &arms)
{
  std::vector<NormalizationArm> out;
  for (auto arm : arms) {
    auto c = config;
    c.normalization = arm;
    out.push_back({arm, run_bench(c, corpus)});
  }
  return out;
}

std::string comparison_csv(BenchConfig const &config, std::vector<NormalizationArm> const &arms)
{
  std::ostringstream out;
  out << "# ksim-bench version=" << kToolkitVersion << "\n";
  out << "# config=" << config_echo(config) << "\n";
  for (auto const &arm : arms) {
    out << "# arm " << to_string(arm.normalization) << " slices_read=" << arm.result.slices_read
        << " slices_skipped=" << arm.result.slices_skipped << "\n";
    for (auto const &s : arm.result.skipped) {
      out << "# arm " << to_string(arm.normalization) << " skipped " << s << "\n";
    }
  }
  out << "normalization," << kCsvHeader << "\n";
  // Interleave arms row by row so matching cells sit next to each other.
  std::size_t const rows = arms.empty() ? 0 : arms.front().result.rows.size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto const &arm : arms) {
      if (i >= arm.result.rows.size()) { continue; }
      auto const &row = arm.result.rows[i];
      out << to_string(arm.normalization) << ',' << row.pattern << ',' << metrics::format_exact(row.fraction) << ','
          << row.total_acceleration << ',' << row.path << ',' << row.metric << ','
          << metrics::format_exact(row.mean) << ',' << metrics::format_exact(row.std) << ',' << row.n << "\n";
    }
  }
  return out.str();
}

} // namespace ksim::bench
