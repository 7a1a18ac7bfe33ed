#include "amgae/checkpoint.hpp"

#include "amgae/binio.hpp"

#include <stdexcept>

namespace amgae {

namespace {

constexpr char kMagic[8] = {'A', 'M', 'G', 'A', 'E', 'C', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

void put_tensor(std::string& buf, const Tensor& t) {
    binio::put_u64(buf, static_cast<std::uint64_t>(t.rows()));
    binio::put_u64(buf, static_cast<std::uint64_t>(t.cols()));
    for (index_t i = 0; i < t.size(); ++i) binio::put_f64(buf, t.data()[i]);
}

Tensor read_tensor(binio::Reader& r) {
    const auto rows = static_cast<index_t>(r.u64());
    const auto cols = static_cast<index_t>(r.u64());
    if (rows < 0 || cols < 0 || rows > (1 << 24) || cols > (1 << 24))
        throw std::runtime_error("checkpoint: implausible tensor shape");
    Tensor t(rows, cols);
    for (index_t i = 0; i < t.size(); ++i) t.data()[i] = r.f64();
    return t;
}

void put_store(std::string& buf, const ParamStore& store) {
    binio::put_i64(buf, store.step_count());
    binio::put_u32(buf, static_cast<std::uint32_t>(store.slots().size()));
    for (const auto& s : store.slots()) {
        binio::put_string(buf, s.name);
        put_tensor(buf, s.value);
        put_tensor(buf, s.adam_m);
        put_tensor(buf, s.adam_v);
    }
}

ParamStore read_store(binio::Reader& r) {
    ParamStore store;
    store.set_step_count(r.i64());
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.string();
        Tensor value = read_tensor(r);
        Tensor m = read_tensor(r);
        Tensor v = read_tensor(r);
        store.add(name, std::move(value));
        store.slot(name).adam_m = std::move(m);
        store.slot(name).adam_v = std::move(v);
    }
    return store;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    binio::put_u32(buf, kVersion);
    binio::put_u64(buf, ck.config_hash);
    binio::put_i64(buf, ck.epoch);
    binio::put_u64(buf, ck.rng_state);
    put_store(buf, ck.gen);
    put_store(buf, ck.disc);
    binio::write_file_checksummed(path, std::move(buf));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string body = binio::read_file_checksummed(path);
    binio::Reader r(body);
    for (char expected : kMagic)
        if (static_cast<char>(r.u8()) != expected)
            throw std::runtime_error("checkpoint: bad magic in " + path.string());
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    Checkpoint ck;
    ck.config_hash = r.u64();
    ck.epoch = r.i64();
    ck.rng_state = r.u64();
    ck.gen = read_store(r);
    ck.disc = read_store(r);
    if (!r.at_end()) throw std::runtime_error("checkpoint: trailing bytes in " + path.string());
    return ck;
}

}  // namespace amgae
