#pragma once

#include <string>
#include <vector>

#include "rof1d/bvsignal.hpp"
#include "rof1d/verify.hpp"

namespace rof1d {

// shortest round-trip decimal representation of a double
std::string format_double(double x);

void write_signal_csv(const std::string& path, const GridSignal& w);
void write_atoms_json(const std::string& path, const GridSignal& w);
GridSignal read_signal_csv(const std::string& path, const std::string& atoms_path = "");

void write_report_csv(const std::string& path, const std::string& theorem,
                      const std::vector<ReportRow>& rows);

void ensure_directory(const std::string& path);

}  // namespace rof1d
