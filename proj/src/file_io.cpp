#include "file_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

namespace expunge::detail {

namespace {

[[noreturn]] void fail(const std::string& what, const std::filesystem::path& path) {
  throw Error(ErrorCode::Io, what + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  Fd(const std::filesystem::path& path, int flags, mode_t mode = 0644) : fd_(::open(path.c_str(), flags, mode)) {
    if (fd_ < 0) fail("cannot open", path);
  }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void write_all(int fd, ByteView data, std::uint64_t offset, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    auto n = ::pwrite(fd, data.data() + done, data.size() - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("write failed for", path);
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  Fd fd(path, O_RDONLY);
  Bytes out;
  std::uint8_t buf[1 << 16];
  for (;;) {
    auto n = ::read(fd.get(), buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("read failed for", path);
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, ByteView data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    Fd fd(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    write_all(fd.get(), data, 0, tmp);
    if (::fsync(fd.get()) != 0) fail("fsync failed for", tmp);
  }
  std::filesystem::rename(tmp, path);
}

void overwrite_at(const std::filesystem::path& path, std::uint64_t offset, ByteView data) {
  Fd fd(path, O_WRONLY);
  write_all(fd.get(), data, offset, path);
  if (::fsync(fd.get()) != 0) fail("fsync failed for", path);
}

void append_line(const std::filesystem::path& path, std::string_view line) {
  Fd fd(path, O_WRONLY | O_CREAT | O_APPEND);
  std::string text(line);
  text.push_back('\n');
  if (::write(fd.get(), text.data(), text.size()) != static_cast<ssize_t>(text.size())) fail("append failed for", path);
  if (::fsync(fd.get()) != 0) fail("fsync failed for", path);
}

}  // namespace expunge::detail
