#include "mcs/cli/ekey_io.hpp"

#include "mcs/cli/io.hpp"

namespace mcs::cli {

namespace {

constexpr Byte kMagic[4] = {'M', 'C', 'S', 'E'};

void put_u16(Bytes& out, std::uint16_t v)
{
    out.push_back(static_cast<Byte>(v));
    out.push_back(static_cast<Byte>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v)
{
    for(int i = 0; i < 4; ++i)
        out.push_back(static_cast<Byte>(v >> (8 * i)));
}

template <std::size_t N>
void put_array(Bytes& out, const std::array<std::uint8_t, N>& a)
{
    out.insert(out.end(), a.begin(), a.end());
}

} // namespace

Bytes serialize_equivalent_key(const EquivalentKey& ek)
{
    if(ek.num_blocks() > 0xFFFFFFFFu)
        throw Error(ErrorKind::DomainError, "equivalent key too large");
    Bytes out(std::begin(kMagic), std::end(kMagic));
    out.push_back(kEquivalentKeyVersion);
    put_u32(out, static_cast<std::uint32_t>(ek.num_blocks()));
    out.reserve(out.size() + ek.num_blocks() * (2 + kEquivalentRecordSize));
    for(const auto& b : ek.blocks)
    {
        put_u16(out, static_cast<std::uint16_t>(kEquivalentRecordSize));
        out.push_back(static_cast<Byte>(b.l));
        out.push_back(b.swap_bits);
        put_array(out, b.perm[0]);
        put_array(out, b.perm[1]);
        put_array(out, b.seed_star);
        put_array(out, b.rot_x);
        put_array(out, b.rot_y);
        out.push_back(b.flags);
        out.push_back(static_cast<Byte>(b.exempt_row));
        out.push_back(b.probe_row);
    }
    return out;
}

EquivalentKey deserialize_equivalent_key(std::span<const Byte> data)
{
    auto fail = [](const std::string& what) { return Error(ErrorKind::ParseError, "equivalent key: " + what); };
    if(data.size() < 9 || !std::equal(std::begin(kMagic), std::end(kMagic), data.begin()))
        throw fail("bad magic");
    if(data[4] != kEquivalentKeyVersion)
        throw fail("unsupported version " + std::to_string(data[4]));
    std::uint32_t count = 0;
    for(int i = 0; i < 4; ++i)
        count |= static_cast<std::uint32_t>(data[5 + static_cast<std::size_t>(i)]) << (8 * i);

    std::size_t pos = 9;
    EquivalentKey ek;
    ek.blocks.reserve(std::min<std::size_t>(count, data.size() / (2 + kEquivalentRecordSize) + 1));
    for(std::uint32_t k = 0; k < count; ++k)
    {
        if(data.size() - pos < 2)
            throw fail("truncated at block " + std::to_string(k));
        const std::size_t len = data[pos] | (static_cast<std::size_t>(data[pos + 1]) << 8);
        pos += 2;
        if(len < kEquivalentRecordSize || data.size() - pos < len)
            throw fail("bad record length at block " + std::to_string(k));
        auto rec = data.subspan(pos, len);
        pos += len;

        EquivalentBlock b;
        std::size_t i = 0;
        auto take = [&](auto& a)
        {
            std::copy_n(rec.begin() + static_cast<std::ptrdiff_t>(i), a.size(), a.begin());
            i += a.size();
        };
        b.l = static_cast<std::int8_t>(rec[i++]);
        b.swap_bits = rec[i++];
        take(b.perm[0]);
        take(b.perm[1]);
        take(b.seed_star);
        take(b.rot_x);
        take(b.rot_y);
        b.flags = rec[i++];
        b.exempt_row = static_cast<std::int8_t>(rec[i++]);
        b.probe_row = rec[i++];
        if(b.l < -1 || b.l > 15 || b.exempt_row < -1 || b.exempt_row > 15 || b.probe_row > 15)
            throw fail("field out of range at block " + std::to_string(k));
        for(int h = 0; h < 2; ++h)
            for(auto v : b.perm[static_cast<std::size_t>(h)])
                if(v > 7)
                    throw fail("permutation entry out of range at block " + std::to_string(k));
        for(std::size_t j = 0; j < 16; ++j)
            if(b.rot_x[j] > 7 || b.rot_y[j] > 7)
                throw fail("rotation amount out of range at block " + std::to_string(k));
        ek.blocks.push_back(b);
    }
    if(pos != data.size())
        throw fail("trailing bytes");
    return ek;
}

EquivalentKey read_equivalent_key(const std::filesystem::path& path)
{
    return deserialize_equivalent_key(read_bytes(path));
}

void write_equivalent_key(const std::filesystem::path& path, const EquivalentKey& ek)
{
    write_bytes(path, serialize_equivalent_key(ek));
}

} // namespace mcs::cli
