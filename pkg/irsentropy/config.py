"""Experiment configuration files.

A file is a sequence of ``key = value`` entries and blocks
``name { key = value, key = value }``, separated by newlines or
commas. ``#`` starts a comment. Values are integers, floats, quoted
strings, bare identifiers, ``true``/``false`` and bracketed lists.

.. code-block:: text

   glued { base = heisenberg, mark = "b", n = 3 }
   measure = srw
   t = 4
   p_grid = [0.0, 0.5, 1.0]
   seed = 1

"""

import re
import copy
import logging
from collections import OrderedDict as odict

from .errors import ConfigError
from .freegroup import DEFAULT_SUPPORT_BUDGET


LOGGER = logging.getLogger(__name__)

CONSTRUCTIONS = ['glued', 'quotient', 'tree', 'lamplighter', 'finperm']

_TOKEN_RE = re.compile(r'(?P<skip>[ \t\r]+|#[^\n]*)'
                       r'|(?P<newline>\n)'
                       r'|(?P<string>"[^"\n]*")'
                       r'|(?P<punct>[{}\[\]=,])'
                       r'|(?P<atom>[^\s{}\[\]=,"#]+)'
                       r'|(?P<error>.)')


class _Token(object):

    def __init__(self, kind, value, line):
        self.kind = kind
        self.value = value
        self.line = line

    def __repr__(self):
        return f'{self.kind}:{self.value!r}'


def _tokenize(text, filename=None):
    tokens = []
    line = 1

    for mo in _TOKEN_RE.finditer(text):
        kind = mo.lastgroup
        value = mo.group(kind)

        if kind == 'error':
            raise ConfigError(f"unexpected character '{value}'", filename, line)
        elif kind == 'newline':
            tokens.append(_Token(kind, value, line))
            line += 1
        elif kind != 'skip':
            tokens.append(_Token(kind, value, line))

    tokens.append(_Token('end', None, line))

    return tokens


def convert_atom(text):
    if text == 'true':
        return True
    elif text == 'false':
        return False

    try:
        return int(text)
    except ValueError:
        pass

    try:
        return float(text)
    except ValueError:
        return text


class _Parser(object):

    def __init__(self, tokens, filename):
        self.tokens = tokens
        self.position = 0
        self.filename = filename

    def peek(self):
        return self.tokens[self.position]

    def next(self):
        token = self.tokens[self.position]
        self.position += 1

        return token

    def error(self, message, token=None):
        if token is None:
            token = self.peek()

        return ConfigError(message, self.filename, token.line)

    def expect(self, value):
        token = self.next()

        if token.value != value:
            raise self.error(f"expected '{value}', got '{token.value}'", token)

    def skip_separators(self):
        while self.peek().kind == 'newline' or self.peek().value == ',':
            self.next()

    def skip_newlines(self):
        while self.peek().kind == 'newline':
            self.next()

    def parse(self):
        entries = self.parse_entries(None)

        if self.peek().kind != 'end':
            raise self.error(f"unexpected '{self.peek().value}'")

        return entries

    def parse_entries(self, closing):
        entries = odict()

        while True:
            self.skip_separators()
            token = self.peek()

            if token.kind == 'end' or token.value == closing:
                return entries

            if token.kind != 'atom':
                raise self.error(f"expected a key, got '{token.value}'", token)

            key = self.next().value

            if key in entries:
                raise self.error(f"duplicate key '{key}'", token)

            if self.peek().value == '{':
                self.next()
                entries[key] = self.parse_entries('}')
                self.expect('}')
            else:
                self.expect('=')
                entries[key] = self.parse_value()

    def parse_value(self):
        token = self.next()

        if token.kind == 'string':
            return token.value[1:-1]
        elif token.kind == 'atom':
            return convert_atom(token.value)
        elif token.value == '[':
            items = []

            while True:
                self.skip_newlines()

                if self.peek().value == ']':
                    self.next()

                    return items

                items.append(self.parse_value())
                self.skip_newlines()

                if self.peek().value == ',':
                    self.next()
                elif self.peek().value != ']':
                    raise self.error(f"expected ',' or ']', got '{self.peek().value}'")
        elif token.value == '{':
            entries = self.parse_entries('}')
            self.expect('}')

            return entries
        else:
            raise self.error(f"expected a value, got '{token.value}'", token)


def parse_config_text(text, filename=None):
    """Parse given config text into an ordered dictionary. Blocks are
    nested ordered dictionaries.

    """

    return _Parser(_tokenize(text, filename), filename).parse()


def parse_value_text(text):
    """Parse a single value, as given to ``--set key=value``.

    """

    parser = _Parser(_tokenize(text, '--set'), '--set')
    value = parser.parse_value()

    if parser.peek().kind != 'end':
        raise parser.error(f"trailing input after value '{text}'")

    return value


def _integer(minimum=None):
    def check(key, value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, not {value!r}")

        if minimum is not None and value < minimum:
            raise ConfigError(f"'{key}' must be at least {minimum}, not {value}")

        return value

    return check


def _number(minimum=None, maximum=None):
    def check(key, value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number, not {value!r}")

        value = float(value)

        if minimum is not None and value < minimum:
            raise ConfigError(f"'{key}' must be at least {minimum}, not {value}")

        if maximum is not None and value > maximum:
            raise ConfigError(f"'{key}' must be at most {maximum}, not {value}")

        return value

    return check


def _boolean(key, value):
    if not isinstance(value, bool):
        raise ConfigError(f"'{key}' must be true or false, not {value!r}")

    return value


def _text(key, value):
    if isinstance(value, (dict, list, bool)):
        raise ConfigError(f"'{key}' must be a string, not {value!r}")

    return str(value)


def _optional(check):
    def optional(key, value):
        if value is None:
            return None

        return check(key, value)

    return optional


def _probabilities(key, value):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{key}' must be a non-empty list")

    return [_number(0.0, 1.0)(key, item) for item in value]


def _texts(key, value):
    if not isinstance(value, list):
        value = [value]

    return [_text(key, item) for item in value]


def _measure(key, value):
    if isinstance(value, dict):
        return odict((str(word), _number(0.0)(f'{key}.{word}', weight))
                     for word, weight in value.items())

    if value != 'srw':
        raise ConfigError(f"'{key}' must be srw or a block of word weights")

    return value


SCHEMA = odict([
    ('measure', (_measure, 'srw')),
    ('measure_file', (_optional(_text), None)),
    ('t', (_integer(1), 3)),
    ('t_max', (_integer(1), 6)),
    ('p_grid', (_probabilities, [i / 10 for i in range(11)])),
    ('theta_samples', (_integer(2), 100)),
    ('walk_samples', (_optional(_integer(1)), None)),
    ('miller_madow', (_boolean, False)),
    ('exact_max_indices', (_integer(0), 16)),
    ('support_budget', (_integer(1), DEFAULT_SUPPORT_BUDGET)),
    ('horizon', (_integer(1), 1000)),
    ('walks', (_integer(1), 1000)),
    ('k', (_integer(0), 1)),
    ('n', (_optional(_integer(1)), None)),
    ('epsilon', (_optional(_number(0.0, 1.0)), None)),
    ('beta', (_optional(_number(0.0, 1.0)), None)),
    ('eta', (_number(0.0, 1.0), 1.0)),
    ('delta', (_optional(_number(0.0, 1.0)), None)),
    ('target', (_optional(_number(0.0)), None)),
    ('tolerance', (_number(0.0), 1e-3)),
    ('words', (_texts, [])),
    ('pairs', (_integer(1), 10000)),
    ('samples', (_integer(1), 20)),
    ('seed', (_integer(0), 0)),
    ('parallel', (_integer(1), 1)),
    ('mode', (_text, 'auto'))
])

CONSTRUCTION_SCHEMAS = {
    'glued': odict([
        ('base', (_text, 'heisenberg')),
        ('mark', (_text, 'b')),
        ('n', (_integer(1), 3)),
        ('orient', (_boolean, True))
    ]),
    'quotient': odict([
        ('name', (_text, 'heisenberg'))
    ]),
    'tree': odict([
        ('rank', (_integer(1), 2))
    ]),
    'lamplighter': odict([
        ('lamp', (_text, 'z2')),
        ('base', (_text, 'z1'))
    ]),
    'finperm': odict([
        ('points', (_text, 'z1')),
        ('shift', (_boolean, True))
    ])
}

MODES = ['auto', 'exact', 'monte_carlo']


def _resolve_block(name, values, schema):
    if not isinstance(values, dict):
        raise ConfigError(f"'{name}' must be a block")

    unknown = [key for key in values if key not in schema]

    if unknown:
        raise ConfigError(f"unknown key '{name}.{unknown[0]}'")

    resolved = odict()

    for key, (check, default) in schema.items():
        if key in values:
            resolved[key] = check(f'{name}.{key}', values[key])
        else:
            resolved[key] = copy.deepcopy(default)

    return resolved


class ExperimentConfig(object):
    """A schema validated experiment configuration with all defaults
    filled in.

    """

    def __init__(self, values=None, filename=None):
        values = odict(values or {})
        self.filename = filename
        constructions = [name for name in CONSTRUCTIONS if name in values]

        if len(constructions) > 1:
            raise ConfigError(f"more than one construction: {', '.join(constructions)}",
                              filename)

        if constructions:
            self.construction = constructions[0]
        else:
            self.construction = 'tree'

        unknown = [key
                   for key in values
                   if key not in SCHEMA and key not in CONSTRUCTIONS]

        if unknown:
            raise ConfigError(f"unknown key '{unknown[0]}'", filename)

        try:
            self.construction_values = _resolve_block(
                self.construction,
                values.get(self.construction, {}),
                CONSTRUCTION_SCHEMAS[self.construction])
            self.values = _resolve_block('config',
                                         {key: value
                                          for key, value in values.items()
                                          if key in SCHEMA},
                                         SCHEMA)
        except ConfigError as e:
            if e.filename is None:
                e.filename = filename

            raise

        if self.values['mode'] not in MODES:
            raise ConfigError(f"'mode' must be one of {', '.join(MODES)}", filename)

        if self.values['p_grid'] != sorted(self.values['p_grid']):
            raise ConfigError("'p_grid' must be sorted", filename)

    def __getitem__(self, key):
        return self.values[key]

    def resolved(self):
        """The full configuration, defaults included.

        """

        resolved = odict([(self.construction, copy.deepcopy(self.construction_values))])
        resolved.update(copy.deepcopy(self.values))

        return resolved


def apply_overrides(values, overrides):
    """Apply ``key=value`` overrides. Block entries are named
    ``block.key``.

    """

    values = copy.deepcopy(values)

    for override in overrides:
        if '=' not in override:
            raise ConfigError(f"bad override '{override}', expected key=value", '--set')

        key, text = override.split('=', 1)
        key = key.strip()
        value = parse_value_text(text.strip())

        if '.' in key:
            block, key = key.split('.', 1)
            target = values.setdefault(block, odict())

            if not isinstance(target, dict):
                raise ConfigError(f"'{block}' is not a block", '--set')

            target[key] = value
        else:
            values[key] = value

    return values


def load_config(filename=None, overrides=()):
    """Load, override and validate a configuration. Without a file all
    defaults are used.

    """

    values = odict()

    if filename is not None:
        try:
            with open(filename, 'r') as fin:
                text = fin.read()
        except OSError as e:
            raise ConfigError(f'cannot read config: {e.strerror}', filename)

        values = parse_config_text(text, filename)

    values = apply_overrides(values, overrides)
    LOGGER.debug('Loaded config %s with %d overrides.', filename, len(overrides))

    return ExperimentConfig(values, filename)
