"""Synthetic accident-table generator for dataset-free testing.

Emits a CSV in the same shape as the 2013 municipal export.  The injury
label is planted through a logistic model of the MOTO count and the
TIPO_ACID category, scaled by ``signal`` (0 = pure noise, 1 = full
strength), and the casualty columns are back-filled consistently with
the sampled label.  A few rows carry deliberately malformed timestamps
so the cleansing stage has something to drop.
"""

from __future__ import annotations

import csv
import io
from datetime import date, timedelta

import numpy as np

from .errors import ValidationError
from .numutil import sigmoid

SYNTH_HEADER = [
    "ID", "DATA_HORA", "DIA_SEM", "FX_HORA", "NOITE_DIA",
    "LOG1", "LOG2", "PREDIAL1", "LOCAL", "LOCAL_VIA",
    "TIPO_ACID", "REGIAO", "LATITUDE", "LONGITUDE",
    "AUTO", "TAXI", "LOTACAO", "ONIBUS_URB", "ONIBUS_MET",
    "CAMINHAO", "MOTO", "CARROCA", "BICICLETA", "OUTRO",
    "TEMPO", "MES", "CORREDOR", "CONSORCIO",
    "FERIDOS", "FERIDOS_GR", "MORTES", "MORTES_POST", "FATAIS",
    "UPS", "FONTE", "BOLETIM",
]

_WEEKDAYS = [
    "SEGUNDA-FEIRA", "TERCA-FEIRA", "QUARTA-FEIRA", "QUINTA-FEIRA",
    "SEXTA-FEIRA", "SABADO", "DOMINGO",
]

_ACCIDENT_TYPES = [
    "ABALROAMENTO", "COLISAO", "CHOQUE", "ATROPELAMENTO",
    "QUEDA", "TOMBAMENTO", "CAPOTAGEM", "INCENDIO",
]
_TYPE_PROBS = [0.30, 0.28, 0.14, 0.10, 0.08, 0.04, 0.04, 0.02]
#: planted log-odds contribution per accident type
_TYPE_WEIGHTS = {
    "ABALROAMENTO": -3.0, "COLISAO": -2.4, "CHOQUE": 0.8,
    "ATROPELAMENTO": 6.0, "QUEDA": 4.0, "TOMBAMENTO": 2.6,
    "CAPOTAGEM": 1.4, "INCENDIO": -1.2,
}
_MOTO_WEIGHT = 3.4
_BIAS = -1.8

_STREETS = [f"RUA {c}" for c in "ABCDEFGHIJKLMNOPQRST"]
_CROSS_STREETS = [f"AV {c}" for c in "UVWXYZ"]
_REGIONS = ["LESTE", "OESTE", "NORTE", "SUL", "CENTRO"]
_WEATHER = ["BOM", "NUBLADO", "CHUVOSO"]
_CONSORTIUMS = ["", "STS", "UNIBUS", "CONORTE"]

_BAD_TIMESTAMPS = ["2013-02-30 25:99", "31/12/2013 10:00", "not-a-date"]


def generate_fixture(n: int, signal: float, seed: int) -> str:
    """Return CSV text for ``n`` rows with planted signal strength."""
    if n < 10:
        raise ValidationError(f"fixture needs at least 10 rows, got {n}")
    if not 0.0 <= signal <= 1.0:
        raise ValidationError(f"signal must be in [0,1], got {signal}")

    rng = np.random.default_rng(seed)
    n_bad = max(1, min(3, n // 10))
    bad_rows = {n // 4, n // 2, (3 * n) // 4}
    bad_rows = set(sorted(bad_rows)[:n_bad])

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=";", lineterminator="\n")
    writer.writerow(SYNTH_HEADER)

    base_day = date(2013, 1, 1)
    bad_used = 0
    for i in range(n):
        day = base_day + timedelta(days=int(rng.integers(0, 365)))
        hour = int(rng.integers(0, 24))
        minute = int(rng.integers(0, 60))
        stamp = f"{day.isoformat()} {hour:02d}:{minute:02d}"
        if i in bad_rows:
            stamp = _BAD_TIMESTAMPS[bad_used % len(_BAD_TIMESTAMPS)]
            bad_used += 1

        tipo = _ACCIDENT_TYPES[rng.choice(len(_ACCIDENT_TYPES), p=_TYPE_PROBS)]
        auto = int(rng.choice(4, p=[0.25, 0.50, 0.20, 0.05]))
        taxi = int(rng.random() < 0.08)
        lotacao = int(rng.random() < 0.03)
        onibus_urb = int(rng.random() < 0.10)
        onibus_met = int(rng.random() < 0.02)
        caminhao = int(rng.random() < 0.07)
        moto = int(rng.choice(4, p=[0.66, 0.26, 0.06, 0.02]))
        carroca = int(rng.random() < 0.005)
        bicicleta = int(rng.random() < 0.04)
        outro = int(rng.random() < 0.03)

        logit = signal * (_MOTO_WEIGHT * moto + _TYPE_WEIGHTS[tipo] + _BIAS)
        label = int(rng.random() < sigmoid(logit))

        if label:
            feridos = 1 + int(rng.poisson(0.8))
            feridos_gr = int(rng.poisson(0.15))
            mortes = int(rng.random() < 0.02)
            mortes_post = int(rng.random() < 0.01)
        else:
            feridos = feridos_gr = mortes = mortes_post = 0
        fatais = mortes + mortes_post
        ups = 13 if fatais > 0 else (5 if label else 1)
        fonte = ("190" if rng.random() < 0.6 else "EPTC") if label else (
            "EPTC" if rng.random() < 0.8 else "190"
        )

        writer.writerow([
            str(i + 1),
            stamp,
            _WEEKDAYS[day.weekday()],
            str(hour),
            "DIA" if 6 <= hour < 18 else "NOITE",
            _STREETS[int(rng.integers(0, len(_STREETS)))],
            _CROSS_STREETS[int(rng.integers(0, len(_CROSS_STREETS)))]
            if rng.random() < 0.3 else "",
            str(int(rng.integers(0, 5000))),
            "CRUZAMENTO" if rng.random() < 0.3 else "LOGRADOURO",
            _STREETS[int(rng.integers(0, len(_STREETS)))],
            tipo,
            _REGIONS[int(rng.integers(0, len(_REGIONS)))],
            f"{-30.05 + 0.1 * (rng.random() - 0.5):.6f}",
            f"{-51.20 + 0.1 * (rng.random() - 0.5):.6f}",
            str(auto), str(taxi), str(lotacao), str(onibus_urb),
            str(onibus_met), str(caminhao), str(moto), str(carroca),
            str(bicicleta), str(outro),
            _WEATHER[rng.choice(3, p=[0.55, 0.25, 0.20])],
            str(day.month),
            str(int(rng.random() < 0.15)),
            _CONSORTIUMS[int(rng.integers(0, len(_CONSORTIUMS)))],
            str(feridos), str(feridos_gr), str(mortes), str(mortes_post),
            str(fatais),
            str(ups),
            fonte,
            f"2013{i:06d}",
        ])
    return buf.getvalue()
