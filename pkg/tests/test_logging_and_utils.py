import os

import pandas as pd
import pytest

from config import Config, DevelopmentConfig, TestingConfig, get_config
from odrpo.exceptions import ConfigError, DegenerateMatrix, InputError, MeanTooSmall, TooLarge
from odrpo.models import RewardScale
from odrpo.utils.enumeration import derive_seed, enumerate_statistics, iter_simplex, simplex_size
from odrpo.utils.file_utils import (format_provenance, parse_config_file, parse_float_list,
                                    parse_int_list, parse_int_range, read_result_csv,
                                    read_reward_groups, write_csv)
from odrpo.utils.log_utils import _safe_console_print, log_message

# Basic smoke tests for safe logging, configuration and file helpers.


def test_safe_console_print_does_not_raise():
    # characters that break narrow console code pages
    _safe_console_print("Test symbols μ σ β − α ≥ ✓ 🎉 — end")


def test_log_message_writes_utf8(tmp_path):
    log_file = tmp_path / 'nested' / 'test_log.txt'
    entry = log_message("Unicode μ ✓ line", log_file=str(log_file), console=False)
    data = log_file.read_text(encoding='utf-8')
    assert 'Unicode μ ✓ line' in data
    assert data.rstrip('\n') == entry
    assert entry.startswith('[')


def test_log_message_console_flag(capsys, tmp_path):
    log_message("quiet", log_file='', console=False)
    assert capsys.readouterr().out == ''
    log_message("loud", log_file='', console=True)
    assert 'loud' in capsys.readouterr().out
    assert not os.listdir(tmp_path)


def test_config_classes():
    assert TestingConfig.LOG_FILE == '' and TestingConfig.LOG_TO_STDOUT is False
    assert get_config('testing') is TestingConfig
    assert get_config('unknown') is DevelopmentConfig
    assert Config.CONSISTENCY_THRESHOLD == 0.9
    assert Config.EXACT_LEARNING_RATE > Config.SAMPLED_LEARNING_RATE


def test_exit_codes():
    assert InputError('x').exit_code == 2
    assert ConfigError('x').exit_code == 2
    assert MeanTooSmall('x').exit_code == 3
    assert DegenerateMatrix('x').exit_code == 3
    assert TooLarge('x').exit_code == 4
    assert str(InputError('bad value', line=7)) == 'line 7: bad value'


def test_parse_lists_and_ranges():
    assert parse_int_list('1,8, 16,32') == [1, 8, 16, 32]
    assert parse_float_list('0,0.5,2') == [0.0, 0.5, 2.0]
    assert parse_int_range('2..5') == [2, 3, 4, 5]
    assert parse_int_range('6,2..3,3') == [2, 3, 6]
    for bad in ('5..2', 'a..3', '', ','):
        with pytest.raises(InputError):
            parse_int_range(bad)
    with pytest.raises(InputError):
        parse_int_list('1,x')


def test_parse_config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text("# comment\n\n--scale-k = 5\nweights=gini  # trailing\n", encoding='utf-8')
    assert parse_config_file(str(path)) == {'scale_k': '5', 'weights': 'gini'}

    path.write_text("no separator\n", encoding='utf-8')
    with pytest.raises(InputError, match='line 1'):
        parse_config_file(str(path))
    with pytest.raises(InputError):
        parse_config_file(str(tmp_path / 'missing.cfg'))


def test_read_reward_groups(tmp_path):
    path = tmp_path / 'groups.csv'
    path.write_text("group_id,r_1,r_2,r_3\n# skipped\na,1,2,3\nb,0.5,0.5,2\n", encoding='utf-8')
    groups = read_reward_groups(str(path), RewardScale((0.5, 1, 2, 3)))
    assert [group_id for group_id, _ in groups] == ['a', 'b']
    assert groups[1][1].level_indices == (1, 1, 3)

    path.write_text("id,r_1,r_2\na,1,2\n", encoding='utf-8')
    with pytest.raises(InputError, match='group_id'):
        read_reward_groups(str(path), RewardScale.from_k(3))

    path.write_text("group_id,r_1,r_2\na,1,9\n", encoding='utf-8')
    with pytest.raises(InputError, match='line 2'):
        read_reward_groups(str(path), RewardScale.from_k(3))


def test_reward_group_errors_name_the_physical_line(tmp_path):
    path = tmp_path / 'groups.csv'
    path.write_text("# note one\n# note two\n\ngroup_id,r_1,r_2\ng1,1,2\ng2,1,99\n", encoding='utf-8')
    with pytest.raises(InputError, match='line 6'):
        read_reward_groups(str(path), RewardScale.from_k(3))

    path.write_text("# config: seed=0\ngroup_id,r_1,r_2\n\ng1,1,2\n# between\n\ng2,x,1\n", encoding='utf-8')
    with pytest.raises(InputError, match='line 7'):
        read_reward_groups(str(path), RewardScale.from_k(3))

    path.write_text("\n# only a note\nid,r_1,r_2\ng1,1,2\n", encoding='utf-8')
    with pytest.raises(InputError, match='line 3'):
        read_reward_groups(str(path), RewardScale.from_k(3))


def test_provenance_headed_output_reads_back_as_groups(tmp_path):
    path = tmp_path / 'groups.csv'
    write_csv(pd.DataFrame({'group_id': ['g1'], 'r_1': [1], 'r_2': [3]}), str(path), {'seed': 1})
    ((group_id, group),) = read_reward_groups(str(path), RewardScale.from_k(3))
    assert group_id == 'g1' and group.level_indices == (1, 3)


def test_write_csv_provenance_and_line_endings(tmp_path):
    path = tmp_path / 'out' / 'table.csv'
    frame = pd.DataFrame({'K': [2, 3], 'mac': [0.0, 1 / 3]})
    write_csv(frame, str(path), {'seed': 0, 'command': 'curl-scan'})
    raw = path.read_bytes()
    assert b'\r' not in raw
    assert raw.splitlines()[0] == b'# config: command=curl-scan seed=0'
    back = read_result_csv(str(path))
    assert back['mac'].iloc[1] == 1 / 3
    assert format_provenance({'b': 1, 'a': 2}) == '# config: a=2 b=1'


def test_simplex_enumeration_and_seed_splitting():
    assert simplex_size(3, 2) == 6
    assert list(iter_simplex(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    stats = enumerate_statistics(4, 3)
    assert stats.shape == (simplex_size(4, 3), 4)
    assert (stats.sum(axis=1) == 3).all()
    with pytest.raises(TooLarge):
        enumerate_statistics(10, 30, limit=10 ** 6)

    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
    assert 0 <= derive_seed(2 ** 64 - 1, 3) < 2 ** 64
