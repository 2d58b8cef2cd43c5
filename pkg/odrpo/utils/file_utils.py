import io
import os

import pandas as pd

from odrpo.exceptions import InputError
from odrpo.models.reward import RolloutGroup

GROUP_HEADER_HINT = 'group_id,r_1,...,r_G'


def ensure_directory_exists(path):
    """Create the parent directory of ``path`` when it has one."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def clean_dataframe(df, keep_index=False):
    """
    Clean and standardize a freshly read DataFrame.

    Args:
        df: pandas.DataFrame
        keep_index (bool): keep the incoming row labels instead of renumbering

    Returns:
        pandas.DataFrame: DataFrame with stripped column names and no empty rows
    """
    if df is None or df.empty:
        return df
    df = df.dropna(how='all')
    df.columns = [str(col).strip() for col in df.columns]
    unnamed_cols = [col for col in df.columns if col.lower().startswith('unnamed')]
    df = df.drop(columns=unnamed_cols)
    return df if keep_index else df.reset_index(drop=True)


def _content_lines(file_path):
    """(physical line number, text) of every line that is not blank once '#' comments are cut."""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            raw_lines = f.read().splitlines()
    except UnicodeDecodeError as e:
        raise InputError(f"input is not UTF-8 text: {e}") from None
    lines = []
    for number, raw in enumerate(raw_lines, start=1):
        text = raw.split('#', 1)[0].rstrip()
        if text.strip():
            lines.append((number, text))
    return lines


def read_reward_groups(file_path, scale):
    """
    Read a reward-group CSV with header ``group_id,r_1,...,r_G``.

    Comment ('#') and blank lines may appear anywhere; diagnostics name the
    physical line of the file.

    Args:
        file_path: path to the CSV file
        scale: RewardScale every reward must lie on

    Returns:
        list: (group_id, RolloutGroup) pairs in file order

    Raises:
        InputError: missing file or header, malformed or off-scale values
    """
    if not os.path.exists(file_path):
        raise InputError(f"input file not found: {file_path}")

    lines = _content_lines(file_path)
    if not lines:
        raise InputError(f"empty input: missing header '{GROUP_HEADER_HINT}'", line=1)
    header_line = lines[0][0]
    try:
        df = pd.read_csv(io.StringIO('\n'.join(text for _, text in lines)), dtype=str)
    except pd.errors.EmptyDataError:
        raise InputError(f"empty input: missing header '{GROUP_HEADER_HINT}'", line=header_line) from None
    except pd.errors.ParserError as e:
        raise InputError(f"could not parse CSV: {e}") from None
    if len(df) == len(lines) - 1:
        df.index = [number for number, _ in lines[1:]]
    else:
        df.index = range(header_line + 1, header_line + 1 + len(df))

    df = clean_dataframe(df, keep_index=True)
    columns = list(df.columns)
    expected = ['group_id'] + [f"r_{i}" for i in range(1, len(columns))]
    if not columns or columns != expected or len(columns) < 3:
        raise InputError(f"missing or malformed header, expected '{GROUP_HEADER_HINT}' with G >= 2, "
                         f"got '{','.join(columns)}'", line=header_line)
    if df.empty:
        raise InputError("input has a header but no reward groups", line=header_line + 1)

    groups = []
    for line, row in df.iterrows():
        group_id = row['group_id']
        if pd.isna(group_id) or not str(group_id).strip():
            raise InputError("empty group_id", line=line)
        cells = row[columns[1:]]
        if cells.isna().any():
            raise InputError(f"group '{group_id}' has missing rewards", line=line)
        try:
            rewards = [float(value) for value in cells]
        except ValueError as e:
            raise InputError(f"group '{group_id}': {e}", line=line) from None
        try:
            groups.append((str(group_id).strip(), RolloutGroup.from_rewards(scale, rewards)))
        except InputError as e:
            raise InputError(f"group '{group_id}': {e}", line=line) from None
    return groups


def format_provenance(settings):
    """Single comment line recording the resolved configuration."""
    items = ' '.join(f"{key}={settings[key]}" for key in sorted(settings))
    return f"# config: {items}"


def write_csv(df, file_path, settings=None):
    """
    Write a result table as comma-separated LF-terminated CSV.

    Args:
        df: pandas.DataFrame in its final column order
        file_path: output path; parent directories are created
        settings: optional dict written as a provenance comment above the header

    Returns:
        str: the path written
    """
    ensure_directory_exists(file_path)
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        if settings:
            f.write(format_provenance(settings) + '\n')
        df.to_csv(f, index=False, lineterminator='\n', float_format='%.17g')
    return file_path


def read_result_csv(file_path):
    """Read back a CSV written by ``write_csv``."""
    return pd.read_csv(file_path, comment='#')


def parse_config_file(file_path):
    """
    Parse a key=value configuration file.

    Args:
        file_path: path of the file; blank lines and '#' comments are ignored

    Returns:
        dict: keys normalised to underscores, values as strings
    """
    if not os.path.exists(file_path):
        raise InputError(f"config file not found: {file_path}")
    entries = {}
    with open(file_path, 'r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            text = raw.split('#', 1)[0].strip()
            if not text:
                continue
            if '=' not in text:
                raise InputError(f"expected key=value in config file {file_path}", line=number)
            key, value = (part.strip() for part in text.split('=', 1))
            if not key:
                raise InputError(f"empty key in config file {file_path}", line=number)
            entries[key.lstrip('-').replace('-', '_')] = value
    return entries


def parse_int_list(text):
    """'1,8,16' -> [1, 8, 16]."""
    try:
        return [int(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise InputError(f"expected a comma-separated list of integers, got '{text}'") from None


def parse_float_list(text):
    try:
        return [float(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got '{text}'") from None


def parse_int_range(text):
    """'2..5' -> [2, 3, 4, 5]; comma lists as in parse_int_list, and the two may be mixed."""
    values = []
    for part in str(text).split(','):
        part = part.strip()
        if not part:
            continue
        if '..' in part:
            low, high = (bound.strip() for bound in part.split('..', 1))
            try:
                low, high = int(low), int(high)
            except ValueError:
                raise InputError(f"expected an integer range like '2..5', got '{part}'") from None
            if high < low:
                raise InputError(f"empty range '{part}'")
            values.extend(range(low, high + 1))
        else:
            values.extend(parse_int_list(part))
    if not values:
        raise InputError(f"expected at least one integer, got '{text}'")
    return sorted(set(values))
