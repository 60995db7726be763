#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "rulecg/dataset.hpp"

namespace fixtures {

// T1: X1 = (1,1,0,0), X2 = (1,0,1,0), y = (1,1,0,0).
inline rulecg::BinaryDataset t1() {
  return rulecg::BinaryDataset::from_rows({{1, 1}, {1, 0}, {0, 1}, {0, 0}}, {1, 1, 0, 0});
}

inline const char* kT1Csv = "X1,X2,y\n1,1,1\n1,0,1\n0,1,0\n0,0,0\n";

inline std::string data_path(const std::string& name) { return std::string(RULECG_DATA_DIR) + "/" + name; }

// File in the system temp directory, removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& name, const std::string& contents = {})
      : path_(std::string(P_tmpdir) + "/rulecg_test_" + name) {
    if (!contents.empty()) std::ofstream(path_) << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }
  std::string read() const {
    std::ifstream in(path_);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

 private:
  std::string path_;
};

}  // namespace fixtures
