#include "spiked/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spiked {

static_assert(std::endian::native == std::endian::little, "binary IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated binary file");
    return v;
}

void write_raw(const std::string& path, const Dims& dims, const double* data, std::size_t n) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint64_t>(dims.size()));
    for (auto k : dims) put(os, static_cast<std::uint64_t>(k));
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!os) throw std::runtime_error("write failed for " + path);
}

DenseTensor read_raw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error(path + ": bad magic");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error(path + ": unsupported version");
    const auto d = get<std::uint64_t>(is);
    if (d == 0 || d > 64) throw std::runtime_error(path + ": bad order");
    Dims dims(d);
    for (auto& k : dims) k = static_cast<std::size_t>(get<std::uint64_t>(is));
    std::vector<double> data(dims_product(dims));
    is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw std::runtime_error(path + ": truncated data");
    return DenseTensor(dims, std::move(data));
}

}  // namespace

std::string fmt_num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

void write_tensor_binary(const std::string& path, const DenseTensor& t) {
    write_raw(path, t.dims(), t.data().data(), t.size());
}

DenseTensor read_tensor_binary(const std::string& path) { return read_raw(path); }

void write_tensor_csv(const std::string& path, const DenseTensor& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t off = 0; off < t.size(); ++off) {
        for (auto i : t.multi_index(off)) os << i << ',';
        os << fmt_num(t.data()[off]) << '\n';
    }
}

void write_matrix_binary(const std::string& path, const Mat& m) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
    write_raw(path, {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, r.data(),
              static_cast<std::size_t>(r.size()));
}

Mat read_matrix_binary(const std::string& path) {
    auto t = read_raw(path);
    if (t.order() != 2) throw std::runtime_error(path + ": not a matrix");
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMat>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                    static_cast<Eigen::Index>(t.dim(1)));
}

void write_matrix_csv(const std::string& path, const Mat& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << fmt_num(m(i, j));
        os << '\n';
    }
}

}  // namespace spiked
