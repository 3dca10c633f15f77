# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Scenario configuration: parsing, unit conversion, validation, seeding and
world construction.
"""

import configparser
import os
import re
import warnings
from collections import OrderedDict

import numpy as np
import shapely
from shapely.geometry import Polygon

from core.constitutive import DruckerPragerParams, ElasticParams, Material
from core.coupling import CouplingParams, check_contact_radius, coupling_resolution
from core.errors import DegenerateGeometry, NoMobileObjects, ParseError, \
    RegionOutsideDomain, ValidationError
from core.grid import GridConfig, KernelKind
from core.mpm import MaterialPoints, TransferScheme
from core.sdem import ContactMaterial, build_body
from core.world import World
from data.scenario_def import QUANTITIES, SCENARIO_PATH, base_files, default_values, \
    key_schema, merge_sections, required_keys, scenario_variants, section_kind

SECTION_RE = re.compile(r'^\s*\[([^\]]+)\]')
KEY_RE = re.compile(r'^\s*([^#;=\s][^=]*?)\s*=')


def read_sections(path):
    """
    Raw section tables of an INI file with the line of every key.

    :param path: str.
    :return: (OrderedDict section -> OrderedDict key -> str, dict (section, key) -> line).
    """
    with open(path, 'r', encoding='utf-8') as fp:
        text = fp.read()
    return parse_text(text, path)


def parse_text(text, path=None):
    lines = {}
    section = None
    for no, line in enumerate(text.splitlines(), 1):
        m = SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = KEY_RE.match(line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), no)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    try:
        cp.read_string(text, source=path or '<string>')
    except configparser.MissingSectionHeaderError as e:
        raise ParseError('key outside of any section', path, e.lineno)
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ParseError(e.message.split(': ', 1)[-1], path, e.lineno)
    except configparser.ParsingError as e:
        no = e.errors[0][0] if e.errors else None
        raise ParseError('malformed line', path, no)
    raw = OrderedDict()
    for sec in cp.sections():
        raw[sec] = OrderedDict(cp.items(sec))
    return raw, lines


def _floats(text, n=None):
    vals = [float(s) for s in re.split(r'[,\s]+', text.strip()) if s]
    if n is not None and len(vals) != n:
        raise ValueError('expected %d numbers, got %d' % (n, len(vals)))
    return vals


def _vertices(text):
    pts = [_floats(s, 2) for s in text.split(';') if s.strip()]
    if not pts:
        raise ValueError('empty vertex list')
    return pts


def _bool(text):
    t = text.strip().lower()
    if t in ('1', 'true', 'yes', 'on'):
        return True
    if t in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: %s' % text)


def unit_factors(raw):
    units = raw.get('units', {})
    res = dict((q, float(units.get(q, 1.))) for q in QUANTITIES)
    res['angle'] = np.pi / 180.
    res['rate'] = 1. / res['time']
    res[None] = 1.
    return res


def convert_section(kind, items, factors, path=None, lines=None, section=None):
    """
    Typed, unit-converted values of one section.
    """
    schema = key_schema()[kind]
    res = OrderedDict()
    data = OrderedDict(default_values().get(kind, {}))
    data.update(items)
    for key, text in data.items():
        line = (lines or {}).get((section, key))
        if key not in schema:
            raise ParseError('unknown key "%s" in [%s]' % (key, section), path, line)
        typ, qty = schema[key]
        f = factors[qty] if kind != 'units' else 1.
        try:
            if typ == 'str':
                val = text.strip()
            elif typ == 'list':
                val = [s.strip() for s in text.split(',') if s.strip()]
            elif typ == 'bool':
                val = _bool(text)
            elif typ == 'int':
                val = int(text)
            elif typ == 'ivec':
                val = [int(round(v)) for v in _floats(text, 2)]
            elif typ == 'float':
                val = float(text) * f
            elif typ == 'vec':
                val = np.array(_floats(text, 2)) * f
            elif typ == 'vertices':
                val = np.array(_vertices(text)) * f
            elif typ == 'dt':
                val = 'auto' if text.strip().lower() == 'auto' else float(text) * f
            else:
                raise ValueError('unsupported type %s' % typ)
        except ValueError as e:
            raise ParseError('[%s] %s: %s' % (section, key, e), path, line)
        res[key] = val
    return res


class SeedRegion:
    """
    Seeding region with its lattice sizing.
    """

    def __init__(self, name, shape, material, lower=None, upper=None, center=None,
                 radius=None, vertices=None, points_per_cell=None, lattice=None,
                 count=None, velocity=(0., 0.)):
        self.name = name
        self.shape = shape
        self.material = material
        self.lower = None if lower is None else np.asarray(lower, dtype=np.float64)
        self.upper = None if upper is None else np.asarray(upper, dtype=np.float64)
        self.center = None if center is None else np.asarray(center, dtype=np.float64)
        self.radius = radius
        self.vertices = None if vertices is None else np.asarray(vertices, dtype=np.float64)
        self.points_per_cell = points_per_cell
        self.lattice = lattice
        self.count = count
        self.velocity = np.asarray(velocity, dtype=np.float64)

    def bounds(self):
        if self.shape == 'rect':
            return self.lower, self.upper
        if self.shape == 'disk':
            return self.center - self.radius, self.center + self.radius
        if self.shape == 'polygon':
            return self.vertices.min(axis=0), self.vertices.max(axis=0)
        raise ValueError('unknown region shape %s' % self.shape)

    def area(self):
        if self.shape == 'rect':
            return float(np.prod(np.maximum(self.upper - self.lower, 0.)))
        if self.shape == 'disk':
            return np.pi * self.radius ** 2
        return Polygon(self.vertices).area

    def inside(self, x):
        if self.shape == 'rect':
            return np.all((x >= self.lower) & (x <= self.upper), axis=1)
        if self.shape == 'disk':
            return np.linalg.norm(x - self.center, axis=1) <= self.radius
        return shapely.contains_xy(Polygon(self.vertices), x[:, 0], x[:, 1])


def seed_points(region, density, cfg, material_id=0):
    """
    Deterministic lattice of material points filling a region.

    :param region: SeedRegion.
    :param density: float.
    :param cfg: GridConfig.
    :param material_id: int.
    :return: MaterialPoints.
    """
    lo, hi = region.bounds()
    margin = cfg.kernel.support(cfg.spacing)
    if np.any(lo < cfg.origin + margin) or np.any(hi > cfg.upper - margin):
        raise RegionOutsideDomain('region %s [%s, %s] outside the grid interior [%s, %s]'
                                  % (region.name, lo, hi, cfg.origin + margin,
                                     cfg.upper - margin))
    size = np.maximum(hi - lo, 0.)
    if region.lattice is not None:
        counts = np.array(region.lattice, dtype=int)
        h = np.where(counts > 0, size / np.maximum(counts, 1), 0.)
    else:
        if region.points_per_cell is not None:
            k = np.sqrt(region.points_per_cell)
            if abs(k - round(k)) > 1e-9:
                raise ValueError('points_per_cell must be a square number')
            hs = cfg.spacing / round(k)
        elif region.count is not None:
            area = region.area()
            hs = np.sqrt(area / region.count) if region.count > 0 and area > 0 else 0.
        else:
            raise ValueError('region %s needs points_per_cell, lattice or count' % region.name)
        if hs <= 0.:
            counts = np.zeros(2, dtype=int)
        else:
            counts = np.round(size / hs).astype(int)
        h = np.array([hs, hs])
        if region.shape == 'rect':
            h = np.where(counts > 0, size / np.maximum(counts, 1), 0.)
    if np.any(counts <= 0):
        return MaterialPoints(np.zeros((0, 2)))
    start = lo
    if region.shape != 'rect':
        # cover the bounding box, keep lattice sites inside the region
        counts = np.ceil(size / h).astype(int)
        start = 0.5 * (lo + hi - counts * h)
    xs = start[0] + (np.arange(counts[0]) + 0.5) * h[0]
    ys = start[1] + (np.arange(counts[1]) + 0.5) * h[1]
    gx, gy = np.meshgrid(xs, ys, indexing='ij')
    x = np.stack((gx.ravel(), gy.ravel()), axis=1)
    vol = float(h[0] * h[1])
    if region.shape != 'rect':
        x = x[region.inside(x)]
        # the sites share the exact region area
        if len(x):
            vol = region.area() / len(x)
    n = len(x)
    return MaterialPoints(x, np.tile(region.velocity, (n, 1)), np.full(n, density * vol),
                          np.full(n, vol), np.full(n, material_id, dtype=int))


def body_vertices(body):
    shape = body.get('shape', 'polygon')
    if shape == 'polygon':
        if 'vertices' not in body:
            raise DegenerateGeometry('polygon body without vertices')
        return body['vertices']
    if shape == 'rect':
        w, h = body['width'] / 2., body['height'] / 2.
        return np.array([[-w, -h], [w, -h], [w, h], [-w, h]])
    if shape == 'disk':
        return np.zeros((1, 2))
    if shape == 'regular':
        ang = 2. * np.pi * np.arange(body['sides']) / body['sides']
        return body['circumradius'] * np.stack((np.cos(ang), np.sin(ang)), axis=1)
    raise DegenerateGeometry('unknown body shape %s' % shape)


class ScenarioConfig:
    """
    Validated scenario: typed sections plus everything needed to build a World.
    """

    def __init__(self, raw, path=None, lines=None):
        self.raw = raw
        self.path = path
        self.lines = lines or {}
        self.factors = unit_factors(raw)
        sec = dict((k, convert_section(section_kind(k), v, self.factors, path,
                                       self.lines, k))
                   for k, v in raw.items() if section_kind(k) in key_schema())
        for k in raw:
            if section_kind(k) not in key_schema():
                raise ParseError('unknown section [%s]' % k, path, self.lines.get((k, None)))
        for kind in ('scenario', 'grid', 'coupling', 'schedule', 'output', 'probe'):
            if kind not in sec:
                sec[kind] = convert_section(kind, {}, self.factors, path, self.lines, kind)
        self.sections = sec
        self.check_required()
        scen = sec['scenario']
        self.name = scen.get('name') or (os.path.splitext(os.path.basename(path))[0]
                                         if path else 'scenario')
        self.description = scen.get('description', '')
        self.check = scen.get('check')
        self.gravity = scen['gravity']
        self.units = raw.get('units', {}).get('system', 'consistent')
        self.grid = self.make_grid(sec['grid'])
        self.material_names = [k.split('.', 1)[1] for k in sec if section_kind(k) == 'material']
        self.contact_names = [k.split('.', 1)[1] for k in sec if section_kind(k) == 'contact']
        self.body_names = [k.split('.', 1)[1] for k in sec if section_kind(k) == 'body']
        self.seed_names = [k.split('.', 1)[1] for k in sec if section_kind(k) == 'seed']
        self.schedule = sec['schedule']
        self.output = sec['output']
        self.probe = sec['probe']
        self.dt = None
        self.dt_min = None

    def check_required(self):
        req = required_keys()
        for k, items in self.sections.items():
            for key in req.get(section_kind(k), []):
                if key not in items:
                    raise ParseError('[%s] missing key "%s"' % (k, key), self.path,
                                     self.lines.get((k, None)))

    @staticmethod
    def make_grid(g):
        spacing = g['spacing']
        if 'counts' in g:
            counts = g['counts']
        elif 'size' in g:
            counts = [int(np.ceil(s / spacing - 1e-9)) + 1 for s in g['size']] \
                if spacing > 0 else [0, 0]
        else:
            counts = [0, 0]
        if g['kernel'] == 'gimp':
            kernel = KernelKind.gimp(g.get('gimp_half_width'))
        elif g['kernel'] in ('bspline', 'bspline_a4'):
            kernel = KernelKind.bspline()
        else:
            raise ValueError('unknown kernel %s' % g['kernel'])
        return GridConfig(g['origin'], spacing, counts, kernel)

    def materials(self):
        res = []
        for name in self.material_names:
            m = self.sections['material.' + name]
            plastic = None
            if 'friction_angle' in m:
                plastic = DruckerPragerParams(m['friction_angle'], m['cohesion'],
                                              m['tensile_strength'], m['dilation_angle'])
            scheme = TransferScheme(m['scheme'], m['alpha'])
            res.append(Material(name, m['density'],
                                ElasticParams(m['bulk_modulus'], m['shear_modulus'],
                                              m.get('poisson')),
                                plastic, scheme))
        return res

    def contacts(self):
        res = OrderedDict()
        for name in self.contact_names:
            c = self.sections['contact.' + name]
            res[name] = ContactMaterial(c['normal_stiffness'], c['tangential_stiffness'],
                                        c['friction'])
        return res

    def contact_for(self, name, contacts):
        if name is None:
            if not contacts:
                raise KeyError('no [contact.*] section')
            return next(iter(contacts.values()))
        return contacts[name]

    def bodies(self, contacts=None):
        contacts = self.contacts() if contacts is None else contacts
        res = []
        for name in self.body_names:
            b = self.sections['body.' + name]
            body = build_body(body_vertices(b), b['sphero_radius'], density=b.get('density'),
                              mass=b.get('mass'), fixed=b['fixed'],
                              material=self.contact_for(b.get('contact'), contacts),
                              center=b['center'], angle=b['angle'], name=name)
            body.set_velocity(b['velocity'], b['angular_velocity'])
            res.append(body)
        return res

    def regions(self):
        res = []
        for name in self.seed_names:
            s = self.sections['seed.' + name]
            res.append(SeedRegion(name, s['shape'], s['material'], s.get('lower'),
                                  s.get('upper'), s.get('center'), s.get('radius'),
                                  s.get('vertices'), s.get('points_per_cell'),
                                  s.get('lattice'), s.get('count'), s['velocity']))
        return res

    def points(self, materials=None):
        materials = self.materials() if materials is None else materials
        names = [m.name for m in materials]
        groups = []
        for r in self.regions():
            mid = names.index(r.material)
            groups.append(seed_points(r, materials[mid].density, self.grid, mid))
        return MaterialPoints.concat(groups)

    def coupling(self, contacts=None):
        contacts = self.contacts() if contacts is None else contacts
        c = self.sections['coupling']
        material = contacts[c['contact']] if c.get('contact') else None
        return CouplingParams(c['verlet_distance'], c.get('contact_radius'), c['kappa1'],
                              c['kappa2'], material, c['dt'])

    def points_per_cell(self, points=None):
        """Average number of points per grid cell over the seeded area."""
        area = sum(r.area() for r in self.regions())
        n = len(self.points() if points is None else points)
        if area <= 0. or n == 0:
            return None
        return n / (area / self.grid.spacing ** 2)

    def build_world(self):
        """
        :return: World ready to step, time step resolved.
        """
        materials = self.materials()
        contacts = self.contacts()
        world = World(self.grid, materials, self.points(materials), self.bodies(contacts),
                      self.coupling(contacts), self.gravity)
        if self.dt is None:
            self.dt = self.resolve_dt(world)
        res = coupling_resolution(world, self.dt)
        if res > 1.:
            warnings.warn("%s: point contact spring under-resolved, omega dt = %.3g"
                          % (self.name, res))
        return world

    def resolve_dt(self, world):
        dt = self.sections['coupling']['dt']
        if dt == 'auto':
            return world.critical_dt()
        return dt

    def validate(self):
        """
        Collect every violation, then raise once.
        """
        errors = list(self.grid.check())
        names = list(self.material_names)
        materials = []
        try:
            materials = self.materials()
        except ValueError as e:
            raise ParseError(str(e), self.path)
        for m in materials:
            errors += m.check()
            errors += m.scheme.check(self.grid.kernel)
        contacts = self.contacts()
        for name, c in contacts.items():
            errors += c.check(name)
        cpl = self.sections['coupling']
        if cpl.get('contact') and cpl['contact'] not in contacts:
            errors.append(('unknown-material', 'coupling contact %s undefined' % cpl['contact']))
        bodies = []
        for name in self.body_names:
            b = self.sections['body.' + name]
            if b.get('contact') is not None and b['contact'] not in contacts:
                errors.append(('unknown-material', 'body %s: contact %s undefined'
                               % (name, b['contact'])))
            elif not contacts:
                errors.append(('unknown-material', 'body %s: no contact material' % name))
            if b.get('density') is None and b.get('mass') is None:
                errors.append(('body-geometry', 'body %s: density or mass required' % name))
        if not any(e[0] in ('unknown-material', 'body-geometry') for e in errors):
            try:
                bodies = self.bodies(contacts)
            except (DegenerateGeometry, KeyError) as e:
                errors.append(('body-geometry', str(e)))
        points = None
        for r in self.regions():
            if r.material not in names:
                errors.append(('unknown-material', 'seed %s: material %s undefined'
                               % (r.name, r.material)))
        for key in ('track', 'inclination'):
            for name in self.probe.get(key, []):
                if name not in self.body_names:
                    errors.append(('unknown-body', 'probe %s: body %s undefined' % (key, name)))
        if errors:
            raise ValidationError(errors)
        try:
            points = self.points(materials)
        except RegionOutsideDomain as e:
            errors.append(('region-domain', str(e)))
        except ValueError as e:
            errors.append(('region-domain', str(e)))
        p = self.coupling(contacts)
        if p.kappa1 <= 0. or p.kappa2 <= 0.:
            errors.append(('safety-factors', 'kappa1 and kappa2 must be positive'))
        if p.verlet_distance <= p.radius(self.grid.spacing):
            errors.append(('contact-radius', 'verlet distance %g must exceed r_p %g'
                           % (p.verlet_distance, p.radius(self.grid.spacing))))
        if points is not None and len(points):
            n = self.points_per_cell(points)
            if p.contact_radius is None and n is not None and n < 9:
                errors.append(('contact-radius', 'default r_p needs at least 9 points per '
                               'cell, got %.3g' % n))
            elif n is not None:
                errors += check_contact_radius(p.radius(self.grid.spacing),
                                               self.grid.spacing, n)
        if self.schedule['t_end'] <= 0. or self.schedule['output_every'] < 1 \
                or self.schedule['snapshot_every'] < 0:
            errors.append(('schedule', 't_end > 0, output_every >= 1 and snapshot_every >= 0 '
                           'required'))
        self.dt_min = self.check_time_step(errors, materials, points, bodies, p)
        if errors:
            raise ValidationError(errors)
        return self

    def check_time_step(self, errors, materials, points, bodies, p):
        if points is None or p.kappa1 <= 0. or p.kappa2 <= 0.:
            return None
        world = World(self.grid, materials, points, bodies, p, self.gravity)
        try:
            dt_min = world.critical_dt()
        except NoMobileObjects:
            dt_min = np.inf
        dt = self.sections['coupling']['dt']
        if dt == 'auto':
            if not np.isfinite(dt_min):
                errors.append(('critical-time-step', 'dt = auto needs points or mobile bodies'))
            else:
                self.dt = dt_min
        elif dt <= 0.:
            errors.append(('critical-time-step', 'dt must be positive'))
        elif dt > dt_min * (1. + 1e-12):
            errors.append(('critical-time-step', 'dt = %.6g exceeds the stable step %.6g'
                           % (dt, dt_min)))
        else:
            self.dt = dt
        return dt_min


def parse_scenario(raw, path=None, lines=None):
    """
    :param raw: OrderedDict section -> OrderedDict key -> str.
    :return: validated ScenarioConfig.
    """
    try:
        cfg = ScenarioConfig(raw, path, lines)
    except ValueError as e:
        if isinstance(e, (ParseError, ValidationError)):
            raise
        raise ParseError(str(e), path)
    return cfg.validate()


def load_scenario(path):
    raw, lines = read_sections(path)
    return parse_scenario(raw, path, lines)


def builtin_scenarios():
    """
    :return: OrderedDict name -> raw section tables.
    """
    res = OrderedDict()
    files = base_files()
    cache = {}
    for name, (base, override) in scenario_variants().items():
        if base not in cache:
            cache[base] = read_sections(os.path.join(SCENARIO_PATH, files[base]))[0]
        raw = merge_sections(cache[base], override)
        raw.setdefault('scenario', OrderedDict())['name'] = name
        res[name] = raw
    return res


def load_builtin(name):
    scenarios = builtin_scenarios()
    if name not in scenarios:
        raise KeyError('unknown scenario %s, see list-scenarios' % name)
    return parse_scenario(scenarios[name], path='<builtin:%s>' % name)
