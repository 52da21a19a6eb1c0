"""
Ядро генератора синтетических датасетов: растры, маски, размещение,
блендинг, ввод-вывод датасета и оценка.
"""
