#include "mcs/cli/keyfile.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mcs/cli/io.hpp"
#include "mcs/keyrecovery.hpp"

namespace mcs::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if(b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(std::string_view name, std::string_view v)
{
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if(ec != std::errc{} || p != v.data() + v.size())
        throw Error(ErrorKind::ParseError, "key field " + std::string(name) + " is not an integer: '" + std::string(v) + "'");
    return out;
}

} // namespace

SecretKey parse_key(std::string_view text)
{
    static const char* const kFields[] = {"alpha1", "beta1", "alpha2", "beta2", "secret", "x0"};
    std::map<std::string, std::string, std::less<>> fields;
    std::size_t line_no = 0;
    while(!text.empty())
    {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if(line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if(eq == std::string_view::npos)
            throw Error(ErrorKind::ParseError, "key line " + std::to_string(line_no) + " has no '='");
        std::string name(trim(line.substr(0, eq)));
        if(std::find(std::begin(kFields), std::end(kFields), name) == std::end(kFields))
            throw Error(ErrorKind::ParseError, "unknown key field '" + name + "'");
        if(!fields.emplace(name, std::string(trim(line.substr(eq + 1)))).second)
            throw Error(ErrorKind::ParseError, "duplicate key field '" + name + "'");
    }
    for(const char* f : kFields)
        if(!fields.contains(f))
            throw Error(ErrorKind::ParseError, std::string("missing key field '") + f + "'");

    SecretKey key;
    key.alpha1 = parse_int("alpha1", fields["alpha1"]);
    key.beta1 = parse_int("beta1", fields["beta1"]);
    key.alpha2 = parse_int("alpha2", fields["alpha2"]);
    key.beta2 = parse_int("beta2", fields["beta2"]);
    const int secret = parse_int("secret", fields["secret"]);
    if(secret < 0 || secret > 255)
        throw Error(ErrorKind::InvalidKey, "secret must be a byte");
    key.secret = static_cast<Byte>(secret);
    const auto& x0 = fields["x0"];
    key.x0 = x0.find('.') != std::string::npos ? Fixed129::from_decimal(x0) : Fixed129::from_hex(x0);
    key.validate();
    return key;
}

std::string emit_key(const SecretKey& key)
{
    std::ostringstream os;
    os << "alpha1=" << key.alpha1 << '\n'
       << "beta1=" << key.beta1 << '\n'
       << "alpha2=" << key.alpha2 << '\n'
       << "beta2=" << key.beta2 << '\n'
       << "secret=" << static_cast<int>(key.secret) << '\n'
       << "x0=" << key.x0.to_hex() << '\n';
    return os.str();
}

SecretKey read_key_file(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    return parse_key(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_key_file(const std::filesystem::path& path, const SecretKey& key)
{
    const auto text = emit_key(key);
    write_bytes(path, std::span<const Byte>(reinterpret_cast<const Byte*>(text.data()), text.size()));
}

SecretKey random_key(std::mt19937_64& rng)
{
    static const auto pairs = legal_alpha_beta();
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    SecretKey key;
    const auto a = pairs[pick(rng)];
    const auto b = pairs[pick(rng)];
    key.alpha1 = a.alpha;
    key.beta1 = a.beta;
    key.alpha2 = b.alpha;
    key.beta2 = b.beta;
    key.secret = static_cast<Byte>(rng() & 0xFFu);
    key.x0.lo = rng();
    key.x0.mid = rng();
    key.x0.top = static_cast<std::uint8_t>(rng() & 1u);
    return key;
}

SecretKey generate_key(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return random_key(rng);
}

} // namespace mcs::cli
