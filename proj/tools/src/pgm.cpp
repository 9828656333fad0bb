#include "mcs/cli/pgm.hpp"

#include <cctype>
#include <charconv>

namespace mcs::cli {

namespace {

struct Reader
{
    std::span<const Byte> s;
    std::size_t pos = 0;
    std::vector<std::string>* comments;

    [[noreturn]] void fail(const std::string& what) const { throw Error(ErrorKind::ParseError, "pgm: " + what); }

    void skip_space_and_comments()
    {
        while(pos < s.size())
        {
            if(s[pos] == '#')
            {
                std::size_t e = pos + 1;
                while(e < s.size() && s[e] != '\n')
                    ++e;
                comments->emplace_back(reinterpret_cast<const char*>(s.data()) + pos + 1, e - pos - 1);
                pos = e;
            }
            else if(std::isspace(s[pos]))
                ++pos;
            else
                break;
        }
    }

    std::size_t number(const char* field)
    {
        skip_space_and_comments();
        std::size_t v = 0;
        const char* b = reinterpret_cast<const char*>(s.data()) + pos;
        const char* e = reinterpret_cast<const char*>(s.data()) + s.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if(ec != std::errc{} || p == b)
            fail(std::string("bad ") + field);
        pos += static_cast<std::size_t>(p - b);
        return v;
    }
};

} // namespace

PgmImage parse_pgm(std::span<const Byte> file)
{
    PgmImage img;
    Reader r{file, 0, &img.comments};
    if(file.size() < 2 || file[0] != 'P' || file[1] != '5')
        r.fail("not a binary greymap (P5)");
    r.pos = 2;
    img.width = r.number("width");
    img.height = r.number("height");
    const auto maxval = r.number("maxval");
    if(maxval != 255)
        r.fail("only maxval 255 is supported");
    if(r.pos >= file.size() || !std::isspace(file[r.pos]))
        r.fail("missing separator after maxval");
    ++r.pos;
    if(img.width == 0 || img.height == 0)
        r.fail("empty image");
    const std::size_t need = img.width * img.height;
    if(file.size() - r.pos != need)
        r.fail("expected " + std::to_string(need) + " pixel bytes, found " + std::to_string(file.size() - r.pos));
    img.pixels.assign(file.begin() + static_cast<std::ptrdiff_t>(r.pos), file.end());
    return img;
}

Bytes emit_pgm(const PgmImage& image)
{
    if(image.pixels.size() != image.width * image.height)
        throw Error(ErrorKind::LengthMismatch, "pgm: pixel count does not match width*height");
    std::string head = "P5\n";
    for(const auto& c : image.comments)
        head += "#" + c + "\n";
    head += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    Bytes out(head.begin(), head.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    return out;
}

std::optional<std::size_t> comment_value(const PgmImage& image, std::string_view key)
{
    for(const auto& c : image.comments)
    {
        std::string_view v(c);
        while(!v.empty() && v.front() == ' ')
            v.remove_prefix(1);
        if(!v.starts_with(key) || v.size() <= key.size() || v[key.size()] != '=')
            continue;
        v.remove_prefix(key.size() + 1);
        std::size_t n = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if(ec != std::errc{} || p != v.data() + v.size())
            throw Error(ErrorKind::ParseError, "pgm: bad value for " + std::string(key));
        return n;
    }
    return std::nullopt;
}

PgmImage wrap_stream(std::span<const Byte> stream, std::size_t width, std::string_view tag)
{
    if(width == 0)
        throw Error(ErrorKind::DomainError, "pgm: zero width");
    PgmImage img;
    img.width = width;
    img.height = (stream.size() + width - 1) / width;
    if(img.height == 0)
        img.height = 1;
    img.pixels.assign(img.width * img.height, 0);
    std::copy(stream.begin(), stream.end(), img.pixels.begin());
    img.comments.push_back(" " + std::string(tag) + "=" + std::to_string(stream.size()));
    return img;
}

} // namespace mcs::cli
