#pragma once

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhwy/qhwy.hpp"

namespace testutil {

inline std::string cli_path() {
  if (const char* env = std::getenv("QHWY_CLI")) return env;
#ifdef QHWY_CLI_PATH
  return QHWY_CLI_PATH;
#else
  throw std::runtime_error("QHWY_CLI_PATH not compiled in and QHWY_CLI not set");
#endif
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

inline bool file_exists(const std::string& path) {
  std::ifstream in(path);
  return in.good();
}

inline std::string make_temp_dir(const std::string& hint) {
  std::string tmpl = ::testing::TempDir() + hint + ".XXXXXX";
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (::mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed for " + tmpl);
  return std::string(buf.data());
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with the given argument string; captures stdout/stderr.
inline CmdResult run_cli(const std::string& args) {
  const std::string dir = make_temp_dir("qhwy_cli_io");
  const std::string out_path = dir + "/stdout.txt";
  const std::string err_path = dir + "/stderr.txt";
  const std::string cmd =
      "'" + cli_path() + "' " + args + " > '" + out_path + "' 2> '" + err_path + "'";
  const int rc = std::system(cmd.c_str());
  CmdResult res;
  if (rc != -1 && WIFEXITED(rc)) res.exit_code = WEXITSTATUS(rc);
  res.out = read_file(out_path);
  res.err = read_file(err_path);
  return res;
}

inline qhwy::Tensor make_tensor(std::vector<std::int64_t> shape, std::vector<double> values) {
  return qhwy::Tensor(std::move(shape), std::move(values));
}

inline double max_abs_diff(const qhwy::Tensor& a, const qhwy::Tensor& b) {
  if (!a.same_shape(b)) throw std::runtime_error("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace testutil
