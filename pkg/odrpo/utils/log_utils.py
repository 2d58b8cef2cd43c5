import os
import sys
from datetime import datetime

from config import Config


def _safe_console_print(text: str):
    """Print to console in a way that won't crash on narrow code pages.

    If the active console encoding (e.g. cp1252) can't represent a character
    such as the Greek letters used in summaries, fall back to an ASCII-safe
    version instead of raising UnicodeEncodeError mid-run.
    """
    try:
        print(text)
    except UnicodeEncodeError:
        replacements = {
            'μ': 'mu',
            'σ': 'sigma',
            'β': 'beta',
            'α': 'alpha',
            'Δ': 'Delta',
            '≤': '<=',
            '≥': '>=',
            '—': '-',
        }
        sanitized = ''.join(replacements.get(ch, ch) for ch in text)
        try:
            sanitized.encode(sys.stdout.encoding or 'ascii')
            print(sanitized)
        except Exception:
            print(sanitized.encode('ascii', errors='ignore').decode('ascii'))


def log_message(message, log_file=None, console=None):
    """Log a timestamped message to the console and append it to a UTF-8 log file.

    Args:
        message (str): text to record
        log_file (str): log path; defaults to Config.LOG_FILE, empty disables the file
        console (bool): echo to stdout; defaults to Config.LOG_TO_STDOUT

    Returns:
        str: the formatted log entry
    """
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    log_entry = f"[{timestamp}] {message}"

    if console if console is not None else Config.LOG_TO_STDOUT:
        _safe_console_print(log_entry)

    if log_file is None:
        log_file = Config.LOG_FILE
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(log_file, "a", encoding="utf-8") as f:
            f.write(log_entry + "\n")

    return log_entry
