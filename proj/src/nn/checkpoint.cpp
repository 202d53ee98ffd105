// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace clab::nn {

namespace {

void put_u32(std::ostream& os, std::uint32_t v)
{
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d)
{
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    put_u64(os, u);
}

std::uint32_t get_u32(std::istream& is)
{
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    require<IngestError>(is.good(), "truncated checkpoint file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is)
{
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    require<IngestError>(is.good(), "truncated checkpoint file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is)
{
    const std::uint64_t u = get_u64(is);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

} // namespace

void save_tensor_file(const std::filesystem::path& path, const NamedTensors& tensors)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require<IngestError>(os.good(), "cannot open for writing: " + path.string());
    os.write("CLAB", 4);
    put_u32(os, kCheckpointVersion);
    put_u32(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t.rank()));
        for (Index d : t.shape) put_u64(os, static_cast<std::uint64_t>(d));
        for (Index i = 0; i < t.numel(); ++i) put_f64(os, t.data[i]);
    }
    os.flush();
    require<IngestError>(os.good(), "write failed: " + path.string());
}

NamedTensors load_tensor_file(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    require<IngestError>(is.good(), "cannot open checkpoint: " + path.string());
    char magic[4];
    is.read(magic, 4);
    require<IngestError>(is.good() && std::memcmp(magic, "CLAB", 4) == 0,
                         "bad magic in checkpoint: " + path.string());
    const std::uint32_t version = get_u32(is);
    require<IngestError>(version == kCheckpointVersion,
                         "unsupported checkpoint version in " + path.string());
    const std::uint32_t count = get_u32(is);
    NamedTensors out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        require<IngestError>(is.good(), "truncated checkpoint file");
        const std::uint32_t rank = get_u32(is);
        std::vector<Index> shape(rank);
        for (std::uint32_t r = 0; r < rank; ++r)
            shape[r] = static_cast<Index>(get_u64(is));
        Tensor t(shape);
        for (Index j = 0; j < t.numel(); ++j) t.data[j] = get_f64(is);
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

} // namespace clab::nn
