// Malformed cloud-file corpus shared by the unit and acceptance suites.
// Each entry: file content, 1-based line the parser must report, xyz flag.
#pragma once

#include <string>
#include <vector>

namespace fixtures {

struct BadFile {
  std::string content;
  int line;
  bool xyz;
};

inline const std::vector<BadFile>& bad_cloud_files() {
  static const std::vector<BadFile> corpus = {
      {"", 1, false},
      {"not_ply\n", 1, false},
      {"ply\nbogus_keyword 1\n", 2, false},
      {"ply\nformat binary_little_endian 1.0\n", 2, false},
      {"ply\nformat ascii 1.0\nelement vertex\n", 3, false},
      {"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
       "property float z\nend_header\n",
       8, false},
      {"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
       "property float z\nend_header\n1 2\n",
       8, false},
      {"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
       "property float z\nend_header\n1 2 zebra\n",
       8, false},
      {"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
       "property float z\nend_header\n1 2 3 4\n",
       8, false},
      {"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
       "end_header\n1 2\n3 4\n",
       6, false},
      {"ply\nformat ascii 1.0\nelement vertex 1\nproperty list uchar int vertex_indices\n"
       "end_header\n0\n",
       4, false},
      {"ply\nformat ascii 1.0\n", 2, false},
      {"ply\nformat ascii 1.0\nproperty float x\nend_header\n", 4, false},
      {"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
       "property float z\nproperty uchar layer\nend_header\n0 0 0 x\n1 1 1 0\n",
       9, false},
      {"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
       "property float z\nend_header\n0 0 nan_oops\n1 1 1\n",
       8, false},
      {"ply\nformat ascii 1.0\nelement 3\nend_header\n", 3, false},
      {"1 2\n", 1, true},
      {"1 2 3\n4 5\n", 2, true},
      {"1 2 3 4\n", 1, true},
      {"a b c\n", 1, true},
      {"1 2 3\nx y z\n", 2, true},
  };
  return corpus;
}

}  // namespace fixtures
