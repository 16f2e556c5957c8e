#pragma once

#include <map>
#include <string>

#include "phasebal/milp.hpp"

namespace phasebal {

/// MPS text plus the sidecar needed to reproduce the instance exactly:
/// names wider than the 8-character MPS field are deterministically mangled
/// and recorded in name_map; semantic tags travel in tags.
struct MpsDocument {
  std::string text;
  std::map<std::string, std::string> name_map;  // mps name -> original name
  std::map<std::string, std::string> tags;      // original name -> tag
};

MpsDocument export_mps(const MilpInstance& inst,
                       const std::string& model_name = "PHASEBAL");

MilpInstance parse_mps(const std::string& text,
                       const std::map<std::string, std::string>& name_map = {},
                       const std::map<std::string, std::string>& tags = {});

/// Writes the MPS document to path (gzip when it ends in .gz) and the
/// sidecar name map to path + ".map.json".
void write_mps_file(const MilpInstance& inst, const std::string& path);

/// Reads an MPS file written by write_mps_file, applying the sidecar when
/// present next to the file.
MilpInstance read_mps_file(const std::string& path);

}  // namespace phasebal
