import os


def read_config(path):
    name = os.path.join(path)
    return name
