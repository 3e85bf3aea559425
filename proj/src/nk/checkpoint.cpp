#include "platoonsim/nk/checkpoint.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

#include "platoonsim/common/errors.hpp"

namespace psim::nk {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::string read_string(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointFile& file) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_string(os, file.kind);
    write_string(os, file.meta_json);
    write_u64(os, file.groups.size());
    for (const auto& [name, group] : file.groups) {
        write_string(os, name);
        write_u64(os, group.layout.tensor_count());
        for (std::size_t i = 0; i < group.layout.tensor_count(); ++i) {
            const TensorSpec& spec = group.layout.spec(i);
            write_string(os, spec.name);
            write_u32(os, static_cast<std::uint32_t>(spec.shape.size()));
            for (int d : spec.shape) write_u32(os, static_cast<std::uint32_t>(d));
            write_u32(os, static_cast<std::uint32_t>(spec.fan_in));
            os.write(reinterpret_cast<const char*>(group.values.data() + spec.offset),
                     static_cast<std::streamsize>(spec.size * sizeof(double)));
        }
    }
    if (!os) throw ConfigError("checkpoint write failed: " + path);
}

CheckpointFile load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open checkpoint: " + path);
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw ConfigError("not a checkpoint file: " + path);
    }
    const std::uint32_t version = read_u32(is);
    if (version != kVersion) {
        throw ConfigError("unsupported checkpoint version in " + path);
    }
    CheckpointFile file;
    file.kind = read_string(is);
    file.meta_json = read_string(is);
    const std::uint64_t group_count = read_u64(is);
    for (std::uint64_t gi = 0; gi < group_count; ++gi) {
        const std::string group_name = read_string(is);
        CheckpointGroup group;
        const std::uint64_t tensor_count = read_u64(is);
        std::vector<std::vector<double>> datas;
        for (std::uint64_t ti = 0; ti < tensor_count; ++ti) {
            const std::string name = read_string(is);
            const std::uint32_t ndim = read_u32(is);
            std::vector<int> shape(ndim);
            for (auto& d : shape) d = static_cast<int>(read_u32(is));
            const int fan_in = static_cast<int>(read_u32(is));
            group.layout.add(name, shape, fan_in);
            const TensorSpec& spec = group.layout.spec(group.layout.tensor_count() - 1);
            std::vector<double> data(spec.size);
            is.read(reinterpret_cast<char*>(data.data()),
                    static_cast<std::streamsize>(spec.size * sizeof(double)));
            datas.push_back(std::move(data));
        }
        group.values.resize(group.layout.total_size());
        for (std::size_t ti = 0; ti < datas.size(); ++ti) {
            const TensorSpec& spec = group.layout.spec(ti);
            std::copy(datas[ti].begin(), datas[ti].end(),
                      group.values.begin() + static_cast<long>(spec.offset));
        }
        file.groups.emplace_back(group_name, std::move(group));
    }
    if (!is) throw ConfigError("checkpoint truncated: " + path);
    return file;
}

}  // namespace psim::nk
