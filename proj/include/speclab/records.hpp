#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace speclab {

// One trial's persisted spectrum. File schema (one line per trial):
//   trial_index,seed,n_eigs,re0,im0,re1,im1,...
// with 17 significant digits so replays are byte-identical.
struct EigenRecord {
    int trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<std::complex<double>> eigs; // canonical (Re, Im) order
    int rejection_count = 0;
    double wall_time = 0.0;
    bool failed = false;
    std::string error;
};

struct RunManifest {
    std::string config_hash;
    std::string version = "speclab 1.0";
    std::vector<int> completed;                 // grows monotonically
    std::map<int, std::string> failures;        // index -> error text
    std::map<int, std::int64_t> offsets;        // index -> byte offset
    std::map<int, int> rejections;              // index -> resample count
    std::map<int, double> wall_times;
};

std::string format_record(const EigenRecord& r);
EigenRecord parse_record(const std::string& line);

std::vector<EigenRecord> read_records(const std::string& path);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

} // namespace speclab
