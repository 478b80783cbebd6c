#pragma once

#include "ksim/image.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace ksim::test {

inline Slice random_slice(std::size_t h, std::size_t w, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Slice s(h, w);
  for (auto &v : s.values) {
    v = dist(rng);
  }
  return s;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir
{
public:
  explicit TempDir(std::string const &tag)
  {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ksim_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(TempDir const &) = delete;
  TempDir &operator=(TempDir const &) = delete;

  std::filesystem::path const &path() const { return path_; }
  std::filesystem::path operator/(std::string const &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline double max_abs_diff(Slice const &a, Slice const &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

} // namespace ksim::test
