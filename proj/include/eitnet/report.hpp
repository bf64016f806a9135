#pragma once

#include "eitnet/grid.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace eitnet {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add(const std::vector<std::string>& cells);
    void add(const std::vector<double>& values);
    std::string text() const;
    int rows() const { return static_cast<int>(rows_.size()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline constexpr int kRasterSize = 257;

/// Binary PGM of a nodal field sampled on a square over the disk. Values are
/// mapped linearly from [lo, hi] to 1..255; pixels outside the disk are 0.
std::string pgm_raster(const NodalField& f, const DiskGrid& grid, double lo, double hi, int size = kRasterSize);

/// One nodal field per column: node, x, y, then the named columns.
CsvTable nodal_table(const DiskGrid& grid, const std::vector<std::string>& names,
                     const std::vector<const NodalField*>& fields);

/// Single writer for an output directory; remembers what it wrote.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, const std::string& bytes);

    struct Entry {
        std::string file;
        std::string sha256;
        std::size_t bytes = 0;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

}  // namespace eitnet
