# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Scenario file schema and the builtin scenario tables.
"""

import os
from collections import OrderedDict
from copy import deepcopy

format_versions = {'scenario': 1.0, 'snapshot': 1.1, 'contact_average': 1.0}

SCENARIO_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')

QUANTITIES = ('length', 'time', 'density', 'mass', 'modulus', 'stiffness',
              'velocity', 'acceleration')


def get_format_version(k):
    return format_versions.get(k, 0.0)


def key_schema():
    """
    Keys of every section kind: key -> (value type, quantity class).
    'angle' values are degrees, 'rate' is 1/time.
    """
    return dict(
        scenario=dict(name=('str', None), description=('str', None),
                      gravity=('vec', 'acceleration'), check=('str', None)),
        units=dict([('system', ('str', None))] + [(q, ('float', None)) for q in QUANTITIES]),
        grid=dict(origin=('vec', 'length'), spacing=('float', 'length'),
                  counts=('ivec', None), size=('vec', 'length'),
                  kernel=('str', None), gimp_half_width=('float', 'length')),
        material=dict(density=('float', 'density'),
                      bulk_modulus=('float', 'modulus'),
                      shear_modulus=('float', 'modulus'),
                      poisson=('float', None),
                      scheme=('str', None), alpha=('float', None),
                      friction_angle=('float', 'angle'),
                      cohesion=('float', 'modulus'),
                      tensile_strength=('float', 'modulus'),
                      dilation_angle=('float', 'angle')),
        contact=dict(normal_stiffness=('float', 'stiffness'),
                     tangential_stiffness=('float', 'stiffness'),
                     friction=('float', None)),
        body=dict(shape=('str', None), vertices=('vertices', 'length'),
                  width=('float', 'length'), height=('float', 'length'),
                  sides=('int', None), circumradius=('float', 'length'),
                  sphero_radius=('float', 'length'), center=('vec', 'length'),
                  angle=('float', 'angle'), density=('float', 'density'),
                  mass=('float', 'mass'), fixed=('bool', None), contact=('str', None),
                  velocity=('vec', 'velocity'), angular_velocity=('float', 'rate')),
        seed=dict(shape=('str', None), lower=('vec', 'length'), upper=('vec', 'length'),
                  center=('vec', 'length'), radius=('float', 'length'),
                  vertices=('vertices', 'length'), material=('str', None),
                  points_per_cell=('int', None), lattice=('ivec', None),
                  count=('int', None), velocity=('vec', 'velocity')),
        coupling=dict(verlet_distance=('float', 'length'),
                      contact_radius=('float', 'length'),
                      kappa1=('float', None), kappa2=('float', None),
                      dt=('dt', 'time'), contact=('str', None)),
        schedule=dict(t_end=('float', 'time'), output_every=('int', None),
                      snapshot_every=('int', None)),
        output=dict(per_point=('bool', None), channels=('list', None)),
        probe=dict(discharge_y=('float', 'length'), inclination=('list', None),
                   track=('list', None), neck_diameter=('float', 'length'),
                   grain_size=('float', 'length'), ground_y=('float', 'length'))
    )


def section_kind(section):
    return section.split('.', 1)[0]


def required_keys():
    return dict(
        grid=['spacing'],
        material=['density', 'bulk_modulus', 'shear_modulus'],
        contact=['normal_stiffness', 'tangential_stiffness'],
        body=['sphero_radius', 'center'],
        seed=['shape', 'material'],
        coupling=['verlet_distance'],
        schedule=['t_end']
    )


def default_values():
    return dict(
        scenario=dict(gravity='0, 0'),
        grid=dict(origin='0, 0', kernel='gimp'),
        material=dict(scheme='hybrid', alpha='0.05', cohesion='0',
                      tensile_strength='0', dilation_angle='0'),
        contact=dict(friction='0'),
        body=dict(shape='polygon', angle='0', fixed='false', velocity='0, 0',
                  angular_velocity='0'),
        seed=dict(velocity='0, 0'),
        coupling=dict(kappa1='0.8', kappa2='0.1', dt='auto'),
        schedule=dict(output_every='50', snapshot_every='0'),
        output=dict(per_point='false', channels='')
    )


def base_files():
    return dict(
        table1_collision='table1_collision.ini',
        drop_bounce='drop_bounce.ini',
        table2_normal_force='table2_normal_force.ini',
        table2_friction='table2_friction.ini',
        table3_silo='table3_silo.ini',
        block_impact='block_impact.ini'
    )


def hard_moduli():
    return {'material.disc': {'bulk_modulus': '5.0e3', 'shear_modulus': '3.7e3'}}


def silo_necks():
    # neck diameters (cm) and total point counts
    return [1.5, 2.0, 2.5, 3.0, 3.5], [8000, 9000, 10000]


def silo_override(neck, count):
    half = neck / 2.
    return {
        'body.floor_left': {'center': '%.6g, -0.5' % (-half - 3.0 - 0.5)},
        'body.floor_right': {'center': '%.6g, -0.5' % (half + 3.0 + 0.5)},
        'seed.sand': {'count': '%d' % count},
        'probe': {'neck_diameter': '%.6g' % neck},
    }


def scenario_variants():
    """
    Builtin scenarios as (base file, override sections).
    """
    variants = OrderedDict()
    variants['collision_soft'] = ('table1_collision', {})
    variants['collision_hard'] = ('table1_collision', hard_moduli())
    variants['drop_bounce_soft'] = ('drop_bounce', {})
    variants['drop_bounce_hard'] = ('drop_bounce', hard_moduli())
    for i in range(4):
        variants['normal_force_%d' % i] = ('table2_normal_force',
                                           {'grid': {'spacing': '%.2f' % (0.35 + 0.05 * i)}})
    variants['friction'] = ('table2_friction', {})
    necks, counts = silo_necks()
    for neck in necks:
        for count in counts:
            name = 'silo_d%s_n%d' % (('%.1f' % neck).replace('.', 'p'), count // 1000)
            variants[name] = ('table3_silo', silo_override(neck, count))
    variants['block_impact'] = ('block_impact', {})
    return variants


def merge_sections(base, override):
    res = deepcopy(base)
    for sec, items in override.items():
        res.setdefault(sec, OrderedDict()).update(items)
    return res
