#include "mcs/cli/io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>

namespace mcs::cli {

Bytes read_bytes(const std::filesystem::path& path)
{
    if(path == "-")
    {
        return Bytes(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if(in.bad())
        throw Error(ErrorKind::IoError, "read failed: " + path.string());
    return data;
}

void write_bytes(const std::filesystem::path& path, std::span<const Byte> data)
{
    if(path == "-")
    {
        std::cout.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        std::cout.flush();
        if(!std::cout)
            throw Error(ErrorKind::IoError, "write to stdout failed");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out)
        throw Error(ErrorKind::IoError, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if(!out)
        throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

} // namespace mcs::cli
