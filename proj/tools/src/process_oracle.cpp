#include "mcs/cli/process_oracle.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "mcs/cli/io.hpp"

namespace mcs::cli {

namespace {

std::string quoted(const std::filesystem::path& p)
{
    std::string out = "'";
    for(char c : p.string())
        out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

// removes its files on every exit path
struct TempPair
{
    std::filesystem::path in, out;
    TempPair()
    {
        static std::atomic<unsigned> counter{0};
        const auto dir = std::filesystem::temp_directory_path();
        const auto stem = "mcs-oracle-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
        in = dir / (stem + ".in");
        out = dir / (stem + ".out");
    }
    ~TempPair()
    {
        std::error_code ec;
        std::filesystem::remove(in, ec);
        std::filesystem::remove(out, ec);
    }
};

} // namespace

EncryptionOracle make_process_oracle(std::string command)
{
    return EncryptionOracle(
        [command = std::move(command)](std::span<const Byte> plain)
        {
            TempPair tmp;
            write_bytes(tmp.in, plain);
            const std::string line = command + " < " + quoted(tmp.in) + " > " + quoted(tmp.out);
            const int rc = std::system(line.c_str());
            if(rc != 0)
                throw Error(ErrorKind::IoError, "oracle command failed with status " + std::to_string(rc));
            return read_bytes(tmp.out);
        });
}

} // namespace mcs::cli
