import math
import typing

import pint

import collapselib


class QuantityParseError(collapselib.CollapseLibError):
    pass


# Handler for unicode symbols commonly pasted into config files
def _handle_symbols(x: str) -> str:
    return x.replace('μ', 'u').replace('⁻¹', '**-1').replace('⁻²', '**-2').replace('²', '**2')


# Unit registry, everything in the models is CGS
registry = pint.UnitRegistry(system='cgs', preprocessors=[_handle_symbols])

Quantity = registry.Quantity
Unit = registry.Unit

# Define additional units
registry.define('light_day = speed_of_light * day = lday')

# Shortcuts for dimensionless quantities
dimensionless = registry.dimensionless

# Handle pickle/unpickling (joblib workers) by overwriting the built-in unit registry
pint.set_application_registry(registry)


# CGS units of the model quantities
CM = registry.cm
GRAM = registry.gram
SECOND = registry.second
PER_SECOND = registry.second ** -1
PER_CM2 = registry.cm ** -2
CM2 = registry.cm ** 2
ERG_SECOND = registry.erg * registry.second


# Type hints
T_PARSE_QUANTITY = typing.Union[pint.Quantity, str, float, int]
T_PARSE_UNIT = typing.Union[pint.Unit, pint.Quantity, str]


def parse_unit(x: T_PARSE_UNIT) -> pint.Unit:
    """ Parse arbitrary input to a Unit from the registry.

    :param x: input str
    :return: Unit
    """
    if isinstance(x, registry.Unit):
        # Already a Unit
        return x

    if isinstance(x, registry.Quantity):
        # Extract Unit, can sometimes occur when using values from pint
        return x.units

    if not isinstance(x, str):
        raise QuantityParseError(f"Unsupported input type \"{type(x)}\"")

    try:
        return registry.parse_units(x)
    except (pint.errors.UndefinedUnitError, ValueError, AttributeError) as exc:
        raise QuantityParseError(f"Unknown unit \"{x}\"") from exc


def parse(x: T_PARSE_QUANTITY, to_unit: typing.Optional[T_PARSE_UNIT] = None) -> pint.Quantity:
    """ Parse arbitrary input to a Quantity of specified unit. Bare numbers are taken to already be in the target unit.

    :param x: input str, number or Quantity
    :param to_unit: str or Unit to convert parsed values to
    :return: Quantity with parsed magnitude and specified unit
    """
    if x is None:
        raise QuantityParseError('Cannot convert NoneType to Quantity')

    if isinstance(x, bool):
        raise QuantityParseError('Cannot convert bool to Quantity')

    # Parse unit
    if to_unit is not None:
        to_unit = parse_unit(to_unit)

    if isinstance(x, registry.Quantity):
        x_qty = x
    elif isinstance(x, (int, float)):
        x_qty = Quantity(float(x), dimensionless)
    elif isinstance(x, str):
        try:
            x_qty = Quantity(x.strip())
        except (pint.errors.UndefinedUnitError, pint.errors.DefinitionSyntaxError, ValueError, AttributeError,
                TypeError, SyntaxError) as exc:
            raise QuantityParseError(f"Unable to parse quantity \"{x}\"") from exc
    else:
        raise QuantityParseError(f"Unsupported input type \"{type(x)}\"")

    # Attempt conversion
    if to_unit is not None:
        if not x_qty.unitless:
            try:
                # Don't use in-place change, can mess up values passed to some methods
                x_qty = x_qty.to(to_unit)
            except pint.errors.DimensionalityError as exc:
                raise QuantityParseError(f"Unable to convert parsed quantity {x_qty!s} to unit {to_unit}") from exc
        else:
            x_qty = Quantity(x_qty.m_as(dimensionless), to_unit)

    return x_qty


def parse_magnitude(x: T_PARSE_QUANTITY, magnitude_unit: T_PARSE_UNIT) -> float:
    """ Shortcut method to parse a value and return its magnitude in the specified unit.

    :param x: input str, number or Quantity
    :param magnitude_unit: str or Unit to convert parsed values to before conversion to magnitude
    :return: float magnitude
    """
    magnitude = float(parse(x, magnitude_unit).m_as(parse_unit(magnitude_unit)))

    if math.isnan(magnitude):
        raise QuantityParseError(f"Quantity \"{x}\" is not a number")

    return magnitude


def format_quantity(magnitude: float, magnitude_unit: T_PARSE_UNIT, digits: int = 4) -> str:
    """ Render a CGS magnitude with its unit label for reports.

    :param magnitude: value in magnitude_unit
    :param magnitude_unit: unit of the value
    :param digits: significant digits
    :return: str such as '3.885e+04 s'
    """
    return f"{Quantity(magnitude, parse_unit(magnitude_unit)):.{digits}g~P}"


def converter(to_unit: typing.Optional[T_PARSE_UNIT] = None) -> typing.Callable[[T_PARSE_QUANTITY], float]:
    """ Create a converter returning CGS magnitudes in a pre-defined unit. Useful with the attrs library.

    :param to_unit: str or Unit to convert values to, defaults to unitless
    :return: converter callable
    """
    to_unit = to_unit or dimensionless

    def f(x: T_PARSE_QUANTITY) -> float:
        if isinstance(x, float):
            return x

        return parse_magnitude(x, to_unit)

    return f
