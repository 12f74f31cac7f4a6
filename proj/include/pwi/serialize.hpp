// Binary named-tensor container used for embedding imports and model
// checkpoints.
//
// Layout, all integers and floats little-endian:
//   magic   7 bytes  "PWIEMB1"
//   count   u64      number of entries
//   entry*  count times:
//     keylen  u64
//     key     keylen bytes, UTF-8
//     rank    u64
//     dims    rank x u64
//     values  prod(dims) x f64, row-major
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pwi/error.hpp"
#include "pwi/tensor.hpp"

namespace pwi {

struct NamedArray {
    std::vector<std::uint64_t> dims;
    std::vector<double> values;

    std::size_t size() const {
        std::size_t n = 1;
        for (auto d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }
};

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw DataError("named-tensor file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
}

inline double read_f64(std::istream& is) {
    std::uint64_t bits = read_u64(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace detail

// Insertion-ordered map of named double arrays.
class NamedTensorMap {
public:
    static constexpr const char* kMagic = "PWIEMB1";

    void put(const std::string& key, NamedArray array) {
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_[key] = entries_.size();
            entries_.emplace_back(key, std::move(array));
        } else {
            entries_[it->second].second = std::move(array);
        }
    }

    void put_tensor(const std::string& key, const Tensor& t) {
        NamedArray a;
        for (std::size_t d : t.shape()) a.dims.push_back(d);
        a.values = t.values();
        put(key, std::move(a));
    }

    bool contains(const std::string& key) const { return index_.count(key) != 0; }

    const NamedArray& get(const std::string& key) const {
        auto it = index_.find(key);
        if (it == index_.end()) throw DataError("named-tensor map has no entry '" + key + "'");
        return entries_[it->second].second;
    }

    // Copies stored values into an existing tensor, enforcing its shape.
    void load_into(const std::string& key, Tensor& t) const {
        const NamedArray& a = get(key);
        Shape stored;
        for (auto d : a.dims) stored.push_back(static_cast<std::size_t>(d));
        if (stored != t.shape())
            throw ConfigError("entry '" + key + "' has shape " + shape_str(stored) +
                              ", expected " + shape_str(t.shape()));
        t.values() = a.values;
    }

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, NamedArray>>& entries() const { return entries_; }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw DataError("cannot open '" + path + "' for writing");
        os.write(kMagic, 7);
        detail::write_u64(os, entries_.size());
        for (const auto& [key, a] : entries_) {
            detail::write_u64(os, key.size());
            os.write(key.data(), static_cast<std::streamsize>(key.size()));
            detail::write_u64(os, a.dims.size());
            for (auto d : a.dims) detail::write_u64(os, d);
            for (double v : a.values) detail::write_f64(os, v);
        }
        if (!os) throw DataError("write failed for '" + path + "'");
    }

    static NamedTensorMap load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw DataError("cannot open '" + path + "'");
        char magic[7];
        is.read(magic, 7);
        if (!is || std::memcmp(magic, kMagic, 7) != 0)
            throw DataError("'" + path + "' is not a named-tensor file (bad magic)");
        NamedTensorMap m;
        const std::uint64_t count = detail::read_u64(is);
        for (std::uint64_t e = 0; e < count; ++e) {
            const std::uint64_t keylen = detail::read_u64(is);
            std::string key(static_cast<std::size_t>(keylen), '\0');
            is.read(key.data(), static_cast<std::streamsize>(keylen));
            if (!is) throw DataError("named-tensor file truncated in key");
            NamedArray a;
            const std::uint64_t rank = detail::read_u64(is);
            a.dims.resize(static_cast<std::size_t>(rank));
            for (auto& d : a.dims) d = detail::read_u64(is);
            a.values.resize(a.size());
            for (double& v : a.values) v = detail::read_f64(is);
            m.put(key, std::move(a));
        }
        return m;
    }

private:
    std::vector<std::pair<std::string, NamedArray>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace pwi
