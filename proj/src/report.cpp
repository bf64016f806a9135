#include "eitnet/report.hpp"

#include "eitnet/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace eitnet {

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("sha256: cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv: row width does not match the header");
    rows_.push_back(cells);
}

void CsvTable::add(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add(cells);
}

std::string CsvTable::text() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string pgm_raster(const NodalField& f, const DiskGrid& grid, double lo, double hi, int size) {
    if (f.size() != grid.node_count()) throw ConfigError("raster: field has wrong size");
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::string out = "P5\n" + std::to_string(size) + " " + std::to_string(size) + "\n255\n";
    for (int row = 0; row < size; ++row) {
        const double y = 1.0 - 2.0 * row / (size - 1);
        for (int col = 0; col < size; ++col) {
            const double x = -1.0 + 2.0 * col / (size - 1);
            unsigned char px = 0;
            if (x * x + y * y <= 1.0) {
                const double t = std::clamp((grid.interpolate(f, x, y) - lo) / (hi - lo), 0.0, 1.0);
                px = static_cast<unsigned char>(1 + std::lround(254.0 * t));
            }
            out += static_cast<char>(px);
        }
    }
    return out;
}

CsvTable nodal_table(const DiskGrid& grid, const std::vector<std::string>& names,
                     const std::vector<const NodalField*>& fields) {
    std::vector<std::string> header = {"node", "x", "y"};
    header.insert(header.end(), names.begin(), names.end());
    CsvTable t(header);
    for (int k = 0; k < grid.node_count(); ++k) {
        std::vector<std::string> cells = {std::to_string(k), format_double(grid.x(k)), format_double(grid.y(k))};
        for (const NodalField* f : fields) cells.push_back(format_double((*f)[k]));
        t.add(cells);
    }
    return t;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, const std::string& bytes) {
    const std::filesystem::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
    entries_.push_back({name, sha256_hex(bytes), bytes.size()});
}

}  // namespace eitnet
