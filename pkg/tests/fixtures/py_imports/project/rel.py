from json import dumps

text = dumps([])
