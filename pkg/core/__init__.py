"""
Pakiet core zawierający główne funkcjonalności rachunku magnetycznej
kwantyzacji Weyla: pola, symbole, kwantyzacje, iloczyn Moyala i diagnostykę widmową.
"""
