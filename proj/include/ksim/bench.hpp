#pragma once

#include "ksim/imgio.hpp"
#include "ksim/masks.hpp"
#include "ksim/metrics.hpp"
#include "ksim/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ksim::bench {

inline constexpr char const *kToolkitVersion = "0.1.0";
inline constexpr char const *kCsvHeader = "pattern,fraction,total_acceleration,path,metric,mean,std,n";

enum class Normalization
{
  none,
  percentile,
  histogram
};

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view s);

struct CorpusSpec
{
  std::optional<std::filesystem::path> directory; // *.pgm / *.ksim, sorted by name
  imgio::PhantomKind phantom = imgio::PhantomKind::shepp_logan;
  std::size_t phantom_size = 320;
  std::size_t phantom_count = 1;
};

struct BenchConfig
{
  CorpusSpec corpus;
  std::vector<masks::Pattern> patterns{masks::Pattern::fastmri, masks::Pattern::radial, masks::Pattern::spiral};
  std::vector<unsigned> accelerations{2, 4, 8, 16, 32, 64};
  unsigned downscale = 1;
  pipeline::Path path = pipeline::Path::undersample;
  pipeline::Recon recon = pipeline::Recon::zero_filled;
  pipeline::DownscaleMethod downscale_method = pipeline::DownscaleMethod::kspace;
  Normalization normalization = Normalization::none;
  metrics::SsimMode ssim_mode = metrics::SsimMode::global;
  std::uint64_t seed = 0;
  bool per_slice_seed = false; // fastmri only
  double center_fraction = masks::kDefaultCenterFraction;
  double angle_offset = 0.0;
  std::size_t arm_count = 1;
  std::optional<std::filesystem::path> output;
  unsigned threads = 0; // 0 = auto; not part of the CSV echo
};

/// Parses the JSON config; unknown keys are rejected.
BenchConfig parse_config(std::string const &json_text);
BenchConfig load_config(std::filesystem::path const &path);
/// Canonical one-line JSON echo (excludes `output` and `threads`).
std::string config_echo(BenchConfig const &config);

struct NamedSlice
{
  std::string name;
  Slice slice;
};

struct Corpus
{
  std::vector<NamedSlice> slices;
  std::vector<std::string> skipped; // "name: reason"
  std::size_t size() const { return slices.size() + skipped.size(); }
};

Corpus load_corpus(CorpusSpec const &spec);

struct BenchRow
{
  std::string pattern;
  double fraction = 1.0;
  unsigned total_acceleration = 1;
  std::string path;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct BenchResult
{
  std::vector<BenchRow> rows;
  std::size_t slices_read = 0;
  std::size_t slices_skipped = 0;
  std::vector<std::string> skipped; // "name: reason"
  std::vector<std::string> notes;
  std::vector<std::string> mask_hashes; // "pattern fraction HxW fnv1a64"
  std::vector<bool> histogram_fallback; // per used slice, histogram normalization only
  std::string csv;
};

/// Worker count after applying config.threads and the KSIM_THREADS cap.
unsigned resolve_threads(unsigned requested);

/// Loads the corpus from the config, runs the sweep and, when config.output
/// is set, writes the CSV there.
BenchResult run_bench(BenchConfig const &config);
/// Same sweep over an already loaded corpus; nothing is written.
BenchResult run_bench(BenchConfig const &config, Corpus const &corpus);

struct NormalizationArm
{
  Normalization normalization;
  BenchResult result;
};

/// The same sweep once per normalization arm.
std::vector<NormalizationArm> compare_normalizations(BenchConfig const &config, Corpus const &corpus,
                                                     std::vector<Normalization> const &arms = {
                                                       Normalization::percentile, Normalization::histogram});
/// Rows of every arm prefixed with a `normalization` column.
std::string comparison_csv(BenchConfig const &config, std::vector<NormalizationArm> const &arms);

std::uint64_t fnv1a64(std::vector<std::uint8_t> const &bytes);

} // namespace ksim::bench
