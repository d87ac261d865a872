#!/usr/bin/env python3

"""Colored status lines for humans; results themselves go to files"""

import sys
from colorama import Fore, Style

_quiet = False


def set_quiet(quiet: bool) -> None:
    global _quiet
    _quiet = quiet


def info(message: str) -> None:
    if not _quiet:
        print(message)


def note(message: str) -> None:
    if not _quiet:
        print(f"{Fore.CYAN}ℹ️ {message}{Style.RESET_ALL}")


def success(message: str) -> None:
    if not _quiet:
        print(f"{Fore.GREEN}✅ {message}{Style.RESET_ALL}")


def warning(message: str) -> None:
    if not _quiet:
        print(f"{Fore.YELLOW}⚠️ {message}{Style.RESET_ALL}")


def error(message: str) -> None:
    # Errors are printed even in quiet mode
    print(f"{Fore.RED}❌ {message}{Style.RESET_ALL}", file=sys.stderr)


def highlight(text: str) -> str:
    return f"{Fore.CYAN}{text}{Style.RESET_ALL}"
