"""Minimal readers for ELF symbol tables and `ar` static archives.

Covers exactly what slicing needs: `.symtab` of 64-bit little-endian ELF
relocatable objects and executables, and GNU-style `ar` archives (symbol
index and long-name members handled, thin archives rejected).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import HelixError

ELF_MAGIC = b"\x7fELF"
AR_MAGIC = b"!<arch>\n"

SHT_SYMTAB = 2

SHN_UNDEF = 0

STB_LOCAL = 0
STB_GLOBAL = 1
STB_WEAK = 2

STT_OBJECT = 1
STT_FUNC = 2
STT_GNU_IFUNC = 10


class ElfFormatError(HelixError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    bind: int
    type: int
    shndx: int
    value: int
    size: int

    @property
    def defined(self) -> bool:
        return self.shndx != SHN_UNDEF

    @property
    def is_function(self) -> bool:
        return self.type == STT_FUNC

    @property
    def is_global(self) -> bool:
        return self.bind in (STB_GLOBAL, STB_WEAK)


def _cstr(table: bytes, offset: int) -> str:
    end = table.find(b"\x00", offset)
    if end < 0:
        raise ElfFormatError("unterminated string table entry")
    return table[offset:end].decode("utf-8", errors="replace")


def read_symbols(data: bytes) -> list[Symbol]:
    """All `.symtab` entries of an ELF image (null and section syms skipped)."""
    if len(data) < 64 or data[:4] != ELF_MAGIC:
        raise ElfFormatError("not an ELF image")
    ei_class, ei_data = data[4], data[5]
    if ei_class != 2 or ei_data != 1:
        raise ElfFormatError("only 64-bit little-endian ELF is supported")

    (e_shoff,) = struct.unpack_from("<Q", data, 0x28)
    (e_shentsize, e_shnum) = struct.unpack_from("<HH", data, 0x3A)
    if e_shoff == 0:
        return []
    if e_shentsize != 64:
        raise ElfFormatError(f"unexpected section header size {e_shentsize}")

    def section(index: int) -> tuple:
        # name, type, flags, addr, offset, size, link, info, align, entsize
        return struct.unpack_from("<IIQQQQIIQQ", data, e_shoff + index * 64)

    if e_shnum == 0:  # extended numbering
        e_shnum = section(0)[5]

    symbols: list[Symbol] = []
    for i in range(e_shnum):
        sh = section(i)
        if sh[1] != SHT_SYMTAB:
            continue
        sh_offset, sh_size, sh_link, sh_entsize = sh[4], sh[5], sh[6], sh[9]
        if sh_entsize != 24:
            raise ElfFormatError(f"unexpected symbol entry size {sh_entsize}")
        strtab_sh = section(sh_link)
        strtab = data[strtab_sh[4]:strtab_sh[4] + strtab_sh[5]]
        for off in range(sh_offset, sh_offset + sh_size, 24):
            st_name, st_info, _other, st_shndx, st_value, st_size = \
                struct.unpack_from("<IBBHQQ", data, off)
            name = _cstr(strtab, st_name) if st_name else ""
            if not name:
                continue
            symbols.append(Symbol(
                name=name,
                bind=st_info >> 4,
                type=st_info & 0xF,
                shndx=st_shndx,
                value=st_value,
                size=st_size,
            ))
    return symbols


def read_symbols_from(path) -> list[Symbol]:
    with open(path, "rb") as fh:
        return read_symbols(fh.read())


def archive_members(data: bytes) -> list[tuple[str, bytes]]:
    """(name, contents) for every real member of a GNU `ar` archive.

    The symbol index (`/`) and long-name table (`//`) members are consumed
    internally and not returned.
    """
    if data[:8] == b"!<thin>\n":
        raise HelixError("bad archive: thin archives are not supported")
    if data[:8] != AR_MAGIC:
        raise HelixError("bad archive: missing ar magic")

    members: list[tuple[str, bytes]] = []
    longnames = b""
    pos = 8
    while pos + 60 <= len(data):
        header = data[pos:pos + 60]
        if header[58:60] != b"`\n":
            raise HelixError("bad archive: corrupt member header")
        rawname = header[0:16].decode("ascii", errors="replace").rstrip()
        try:
            size = int(header[48:58].decode("ascii").strip())
        except ValueError:
            raise HelixError("bad archive: corrupt member size") from None
        body = data[pos + 60:pos + 60 + size]
        if len(body) != size:
            raise HelixError("bad archive: truncated member")
        pos += 60 + size + (size & 1)

        if rawname == "/":  # symbol index, regenerated by tools downstream
            continue
        if rawname == "//":
            longnames = body
            continue
        if rawname.startswith("/"):
            off = int(rawname[1:])
            end = longnames.find(b"\n", off)
            name = longnames[off:end].decode("ascii", errors="replace")
            name = name.rstrip("/")
        else:
            name = rawname.rstrip("/")
        members.append((name, body))
    return members


def archive_members_from(path) -> list[tuple[str, bytes]]:
    with open(path, "rb") as fh:
        return archive_members(fh.read())
